#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "expr.hpp"
#include "families.hpp"
#include "spec.hpp"

namespace parabolica {

struct ConfigDiagnostic {
    int line = 0;
    std::string key;
    std::string reason;
};

struct ConfigError : std::runtime_error {
    std::vector<ConfigDiagnostic> diagnostics;
    explicit ConfigError(std::vector<ConfigDiagnostic> diags)
        : std::runtime_error(render(diags)), diagnostics(std::move(diags)) {}

    static std::string render(const std::vector<ConfigDiagnostic>& diags) {
        std::ostringstream os;
        os << "configuration errors:";
        for (const auto& d : diags)
            os << "\n  line " << d.line << ", key '" << d.key << "': " << d.reason;
        return os.str();
    }
};

/// Sectioned key=value run configuration.  '#' starts a comment, keys are
/// unique per section, unknown sections/keys are rejected with line-precise
/// diagnostics.  The validated structure round-trips through serialize().
struct RunConfig {
    // [spec]
    std::string family = "expr";
    int d = 1, m = 1;
    double a = 1.0, b = 3.0, c = 3.0, delta = 1.0;
    double sigma = 1.0, beta = 0.5, gamma = 0.25;
    std::optional<double> xi;
    std::vector<Mat> Bhat;
    Mat Chat;
    std::string kappa_expr;
    PowerLaw kappa_growth{0.0, 0};
    double holder_alpha = 0.5;
    std::map<std::string, std::string> coeff_exprs;  // Qij, Bi_jk, Cjk, bi, Btildei_jk, k_bound
    std::map<std::string, PowerLaw> growth_decls;    // growth_* overrides

    // [grid]
    double radius = 4.0, h = 0.125, inner_radius = 2.0;

    // [time]
    double s = 0.0, t = 0.1, dt = 0.005, theta = 1.0;

    // [evolve]
    std::string bc = "dirichlet";
    std::string flavor = "vector_A";
    bool upwind = false;
    double solver_tol = 1e-10;
    int max_iters = 4000;
    int snapshot_stride = 0;

    // [check]
    std::vector<std::string> hypotheses;
    std::vector<std::string> estimates;
    std::vector<double> p_list{2.0};
    std::vector<double> q_list;
    bool weak = false;
    double lyapunov_lambda = 1.0;

    // [initial]
    std::string initial_type = "bump";
    Vec center;
    double support = 1.0;
    std::vector<double> amplitude{1.0};

    // [sampling]
    double box_radius = 6.0;
    int points_per_dim = 21;
    int time_samples = 3;
    std::uint64_t seed = 42;

    // [output]
    std::string out_dir = "out";
    std::vector<std::string> formats{"json"};

    // [sweep]
    std::map<std::string, std::vector<double>> sweep;

    // canonical raw view used for serialization and hashing
    std::map<std::string, std::map<std::string, std::string>> raw;

    static RunConfig parse(const std::string& text);
    std::string serialize() const;
    std::uint64_t run_id() const;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else cur += ch;
    }
    out.push_back(trim(cur));
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_int(const std::string& s, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "1") { out = true; return true; }
    if (s == "false" || s == "0") { out = false; return true; }
    return false;
}

/// "1 0; 0 1" -> matrix (rows ';'-separated, entries whitespace-separated)
inline bool parse_matrix(const std::string& s, Mat& out) {
    const auto rows = split(s, ';');
    std::vector<std::vector<double>> vals;
    for (const auto& r : rows) {
        std::istringstream is(r);
        std::vector<double> row;
        double v;
        while (is >> v) row.push_back(v);
        if (row.empty()) return false;
        vals.push_back(row);
    }
    const std::size_t cols = vals.front().size();
    for (const auto& r : vals)
        if (r.size() != cols) return false;
    out = Mat(vals.size(), cols);
    for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = vals[i][j];
    return true;
}

/// "<exponent> <sign>" with sign in {+,-,0}
inline bool parse_powerlaw(const std::string& s, PowerLaw& out) {
    std::istringstream is(s);
    double e;
    std::string sign;
    if (!(is >> e >> sign)) return false;
    std::string rest;
    if (is >> rest) return false;
    out.exponent = e;
    if (sign == "+") out.sign = +1;
    else if (sign == "-") out.sign = -1;
    else if (sign == "0") out.sign = 0;
    else return false;
    return true;
}

inline bool is_coeff_key(const std::string& k) {
    auto digits = [](const std::string& s, std::size_t from, std::size_t n) {
        if (s.size() != from + n) return false;
        for (std::size_t i = from; i < from + n; ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    if (k == "k_bound") return true;
    if (k.size() == 3 && k[0] == 'Q' && digits(k, 1, 2)) return true;
    if (k.size() == 3 && k[0] == 'C' && digits(k, 1, 2)) return true;
    if (k.size() == 2 && k[0] == 'b' && digits(k, 1, 1)) return true;
    if (k.size() == 5 && k[0] == 'B' && std::isdigit(static_cast<unsigned char>(k[1])) &&
        k[2] == '_' && digits(k, 3, 2))
        return true;
    if (k.size() == 10 && k.rfind("Btilde", 0) == 0 &&
        std::isdigit(static_cast<unsigned char>(k[6])) && k[7] == '_' && digits(k, 8, 2))
        return true;
    return false;
}

inline bool is_growth_key(const std::string& k) {
    static const std::set<std::string> keys{
        "growth_lambda_Q", "growth_Lambda_Q", "growth_Lambda_C", "growth_B",
        "growth_b",        "growth_Btilde",   "growth_drift",    "growth_k"};
    return keys.count(k) != 0;
}

inline bool is_bhat_key(const std::string& k) {
    return k.size() == 5 && k.rfind("Bhat", 0) == 0 &&
           std::isdigit(static_cast<unsigned char>(k[4]));
}

}  // namespace config_detail

inline RunConfig RunConfig::parse(const std::string& text) {
    using namespace config_detail;
    RunConfig cfg;
    std::vector<ConfigDiagnostic> diags;
    static const std::set<std::string> sections{"spec",  "grid",   "time",     "evolve",
                                                "check", "initial", "sampling", "output",
                                                "sweep"};
    static const std::map<std::string, std::set<std::string>> fixed_keys{
        {"spec",
         {"family", "d", "m", "a", "b", "c", "delta", "sigma", "beta", "gamma", "xi", "Chat",
          "kappa", "kappa_growth", "holder_alpha"}},
        {"grid", {"radius", "h", "inner_radius"}},
        {"time", {"s", "t", "dt", "theta"}},
        {"evolve", {"bc", "flavor", "upwind", "solver_tol", "max_iters", "snapshot_stride"}},
        {"check", {"hypotheses", "estimates", "p", "q", "weak", "lyapunov_lambda"}},
        {"initial", {"type", "center", "support", "amplitude"}},
        {"sampling", {"box_radius", "points_per_dim", "time_samples", "seed"}},
        {"output", {"dir", "formats"}},
    };

    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                diags.push_back({lineno, line, "malformed section header"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section))
                diags.push_back({lineno, section, "unknown section"});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            diags.push_back({lineno, line, "expected key = value"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            diags.push_back({lineno, key, "key outside any section"});
            continue;
        }
        if (!sections.count(section)) continue;  // already diagnosed
        bool known = false;
        if (section == "sweep") known = true;  // sweep accepts parameter names
        else {
            auto it = fixed_keys.find(section);
            known = it != fixed_keys.end() && it->second.count(key) != 0;
            if (!known && section == "spec")
                known = is_coeff_key(key) || is_growth_key(key) || is_bhat_key(key);
        }
        if (!known) {
            diags.push_back({lineno, key, "unknown key in section [" + section + "]"});
            continue;
        }
        if (cfg.raw[section].count(key)) {
            diags.push_back({lineno, key, "duplicate key"});
            continue;
        }
        cfg.raw[section][key] = value;
    }

    auto fail = [&](const std::string& key, const std::string& why) {
        diags.push_back({0, key, why});
    };
    auto get = [&](const std::string& sec, const std::string& key) -> const std::string* {
        auto s = cfg.raw.find(sec);
        if (s == cfg.raw.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };
    auto take_double = [&](const std::string& sec, const std::string& key, double& dst) {
        if (const std::string* v = get(sec, key)) {
            if (!parse_double(*v, dst)) fail(key, "expected a real number, got '" + *v + "'");
        }
    };
    auto take_int = [&](const std::string& sec, const std::string& key, int& dst) {
        if (const std::string* v = get(sec, key)) {
            long long x;
            if (!parse_int(*v, x)) fail(key, "expected an integer, got '" + *v + "'");
            else dst = static_cast<int>(x);
        }
    };
    auto take_bool = [&](const std::string& sec, const std::string& key, bool& dst) {
        if (const std::string* v = get(sec, key)) {
            if (!parse_bool(*v, dst)) fail(key, "expected true/false, got '" + *v + "'");
        }
    };
    auto take_string = [&](const std::string& sec, const std::string& key, std::string& dst) {
        if (const std::string* v = get(sec, key)) dst = *v;
    };
    auto take_list = [&](const std::string& sec, const std::string& key,
                         std::vector<double>& dst) {
        if (const std::string* v = get(sec, key)) {
            dst.clear();
            for (const auto& tok : split(*v, ',')) {
                double x;
                if (!parse_double(tok, x)) {
                    fail(key, "expected a comma list of reals, got '" + tok + "'");
                    return;
                }
                dst.push_back(x);
            }
        }
    };

    take_string("spec", "family", cfg.family);
    take_int("spec", "d", cfg.d);
    take_int("spec", "m", cfg.m);
    take_double("spec", "a", cfg.a);
    take_double("spec", "b", cfg.b);
    take_double("spec", "c", cfg.c);
    take_double("spec", "delta", cfg.delta);
    take_double("spec", "sigma", cfg.sigma);
    take_double("spec", "beta", cfg.beta);
    take_double("spec", "gamma", cfg.gamma);
    take_double("spec", "holder_alpha", cfg.holder_alpha);
    if (const std::string* v = get("spec", "xi")) {
        double x;
        if (!parse_double(*v, x)) fail("xi", "expected a real number");
        else cfg.xi = x;
    }
    if (const std::string* v = get("spec", "Chat")) {
        if (!parse_matrix(*v, cfg.Chat)) fail("Chat", "expected a matrix literal 'a b; c d'");
    }
    take_string("spec", "kappa", cfg.kappa_expr);
    if (const std::string* v = get("spec", "kappa_growth")) {
        if (!parse_powerlaw(*v, cfg.kappa_growth))
            fail("kappa_growth", "expected '<exponent> <sign>' with sign in {+,-,0}");
    }
    if (auto s = cfg.raw.find("spec"); s != cfg.raw.end()) {
        // Bhat matrices, coefficient expressions and growth declarations
        int bhat_max = 0;
        for (const auto& [k, v] : s->second) {
            if (config_detail::is_bhat_key(k)) bhat_max = std::max(bhat_max, k[4] - '0');
        }
        if (bhat_max > 0) {
            cfg.Bhat.assign(static_cast<std::size_t>(bhat_max), Mat());
            for (const auto& [k, v] : s->second) {
                if (!config_detail::is_bhat_key(k)) continue;
                Mat m;
                if (!parse_matrix(v, m)) fail(k, "expected a matrix literal");
                else cfg.Bhat[static_cast<std::size_t>(k[4] - '1')] = m;
            }
        }
        for (const auto& [k, v] : s->second) {
            if (config_detail::is_coeff_key(k)) cfg.coeff_exprs[k] = v;
            if (config_detail::is_growth_key(k)) {
                PowerLaw pl;
                if (!parse_powerlaw(v, pl))
                    fail(k, "expected '<exponent> <sign>' with sign in {+,-,0}");
                else cfg.growth_decls[k] = pl;
            }
        }
    }

    take_double("grid", "radius", cfg.radius);
    take_double("grid", "h", cfg.h);
    take_double("grid", "inner_radius", cfg.inner_radius);

    take_double("time", "s", cfg.s);
    take_double("time", "t", cfg.t);
    take_double("time", "dt", cfg.dt);
    take_double("time", "theta", cfg.theta);

    take_string("evolve", "bc", cfg.bc);
    take_string("evolve", "flavor", cfg.flavor);
    take_bool("evolve", "upwind", cfg.upwind);
    take_double("evolve", "solver_tol", cfg.solver_tol);
    take_int("evolve", "max_iters", cfg.max_iters);
    take_int("evolve", "snapshot_stride", cfg.snapshot_stride);

    if (const std::string* v = get("check", "hypotheses")) cfg.hypotheses = split(*v, ',');
    if (const std::string* v = get("check", "estimates")) cfg.estimates = split(*v, ',');
    take_list("check", "p", cfg.p_list);
    take_list("check", "q", cfg.q_list);
    take_bool("check", "weak", cfg.weak);
    take_double("check", "lyapunov_lambda", cfg.lyapunov_lambda);

    take_string("initial", "type", cfg.initial_type);
    if (const std::string* v = get("initial", "center")) {
        std::istringstream cs(*v);
        std::vector<double> vals;
        double x;
        while (cs >> x) vals.push_back(x);
        cfg.center = Vec(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) cfg.center[i] = vals[i];
    }
    take_double("initial", "support", cfg.support);
    take_list("initial", "amplitude", cfg.amplitude);

    take_double("sampling", "box_radius", cfg.box_radius);
    take_int("sampling", "points_per_dim", cfg.points_per_dim);
    take_int("sampling", "time_samples", cfg.time_samples);
    if (const std::string* v = get("sampling", "seed")) {
        long long x;
        if (!parse_int(*v, x)) fail("seed", "expected an integer");
        else cfg.seed = static_cast<std::uint64_t>(x);
    }

    take_string("output", "dir", cfg.out_dir);
    if (const std::string* v = get("output", "formats")) cfg.formats = split(*v, ',');

    if (auto s = cfg.raw.find("sweep"); s != cfg.raw.end())
        for (const auto& [k, v] : s->second) {
            std::vector<double> vals;
            for (const auto& tok : split(v, ',')) {
                double x;
                if (!parse_double(tok, x)) {
                    fail(k, "sweep values must be reals");
                    vals.clear();
                    break;
                }
                vals.push_back(x);
            }
            if (!vals.empty()) cfg.sweep[k] = vals;
        }

    // cross-field validation
    if (cfg.dt <= 0.0) fail("dt", "dt must be positive");
    if (cfg.h <= 0.0) fail("h", "h must be positive");
    if (cfg.theta < 0.0 || cfg.theta > 1.0) fail("theta", "theta must lie in [0,1]");
    if (cfg.t < cfg.s) fail("t", "time window must have t >= s");
    if (cfg.family != "ex1" && cfg.family != "ex2" && cfg.family != "expr")
        fail("family", "unknown family '" + cfg.family + "' (ex1, ex2, expr)");
    if (cfg.bc != "dirichlet" && cfg.bc != "neumann") fail("bc", "bc must be dirichlet|neumann");
    if (cfg.flavor != "vector_A" && cfg.flavor != "vector_A_star" && cfg.flavor != "scalar_A")
        fail("flavor", "flavor must be vector_A|vector_A_star|scalar_A");

    if (!diags.empty()) throw ConfigError(std::move(diags));
    return cfg;
}

inline std::string RunConfig::serialize() const {
    std::ostringstream os;
    for (const auto& [section, keys] : raw) {
        os << "[" << section << "]\n";
        for (const auto& [k, v] : keys) os << k << " = " << v << "\n";
        os << "\n";
    }
    return os.str();
}

inline std::uint64_t RunConfig::run_id() const {
    // FNV-1a over the canonical serialization
    std::uint64_t h = 14695981039346656037ull;
    for (char c : serialize()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// Build the operator family described by [spec]: a built-in example or the
/// expression-defined coefficients with exact tree differentiation.
inline OperatorSpec build_spec(const RunConfig& cfg) {
    if (cfg.family == "ex1" || cfg.family == "ex2") {
        FamilyParams p;
        p.d = cfg.d;
        p.m = cfg.m;
        p.a = cfg.a;
        p.b = cfg.b;
        p.c = cfg.c;
        p.delta = cfg.delta;
        p.Bhat = cfg.Bhat;
        p.Chat = cfg.Chat;
        p.sigma = cfg.sigma;
        p.beta = cfg.beta;
        p.gamma = cfg.gamma;
        p.xi = cfg.xi;
        return example_family(cfg.family, p);
    }

    const int d = cfg.d, m = cfg.m;
    OperatorSpec s;
    s.family_id = "expr";
    s.d = d;
    s.m = m;
    s.sigma = cfg.sigma;
    s.beta = cfg.beta;
    s.gamma = cfg.gamma;
    s.holder_alpha = cfg.holder_alpha;
    const double xi0 = cfg.xi.value_or(0.0);
    s.xi = [xi0](double) { return xi0; };

    auto tree = [&](const std::string& key, const std::string& fallback) {
        auto it = cfg.coeff_exprs.find(key);
        return expr::parse(it != cfg.coeff_exprs.end() ? it->second : fallback, d);
    };

    using Trees = std::vector<std::vector<expr::NodePtr>>;  // [i][j]
    auto matrix_trees = [&](const std::string& prefix, int rows, int cols,
                            const std::string& diag, const std::string& off) {
        Trees t(rows, std::vector<expr::NodePtr>(cols));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                const std::string key =
                    prefix + std::to_string(i + 1) + std::to_string(j + 1);
                t[i][j] = tree(key, i == j ? diag : off);
            }
        return t;
    };

    const Trees Qt = matrix_trees("Q", d, d, "1", "0");
    const Trees Ct = matrix_trees("C", m, m, "0", "0");
    Trees kt(1, std::vector<expr::NodePtr>(1));
    kt[0][0] = tree("k_bound", "0");
    std::vector<Trees> Bt;
    std::vector<Trees> Btt;
    std::vector<expr::NodePtr> bt;
    for (int i = 0; i < d; ++i) {
        Bt.push_back(matrix_trees("B" + std::to_string(i + 1) + "_", m, m, "0", "0"));
        Btt.push_back(matrix_trees("Btilde" + std::to_string(i + 1) + "_", m, m, "0", "0"));
        bt.push_back(tree("b" + std::to_string(i + 1), "0"));
    }
    // default B_i = b_i I + Btilde_i when only the decomposition is given
    bool b_given = false;
    for (const auto& [key, value] : cfg.coeff_exprs)
        if (key.size() == 5 && key[0] == 'B' &&
            std::isdigit(static_cast<unsigned char>(key[1])))
            b_given = true;
    if (!b_given) {
        for (int i = 0; i < d; ++i)
            for (int r = 0; r < m; ++r)
                for (int c2 = 0; c2 < m; ++c2) {
                    expr::NodePtr v = Btt[i][r][c2];
                    if (r == c2) v = expr::add(v, bt[static_cast<std::size_t>(i)]);
                    Bt[i][r][c2] = v;
                }
    }

    auto eval_mat = [](const Trees& t, double tt, const Vec& x) {
        Mat r(t.size(), t.front().size());
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = 0; j < t.front().size(); ++j)
                r(i, j) = expr::eval(t[i][j], tt, x);
        return r;
    };
    auto diff_trees = [&](const Trees& t) {
        std::vector<Trees> dts;
        for (int l = 0; l < d; ++l) {
            Trees dt(t.size(), std::vector<expr::NodePtr>(t.front().size()));
            for (std::size_t i = 0; i < t.size(); ++i)
                for (std::size_t j = 0; j < t.front().size(); ++j)
                    dt[i][j] = expr::diff(t[i][j], l);
            dts.push_back(dt);
        }
        return dts;
    };

    const auto dQt = diff_trees(Qt);
    std::vector<std::vector<Trees>> d2Qt;
    for (int i = 0; i < d; ++i) d2Qt.push_back(diff_trees(dQt[static_cast<std::size_t>(i)]));
    const auto dCt = diff_trees(Ct);
    std::vector<std::vector<Trees>> dBts, dBtts;
    std::vector<std::vector<expr::NodePtr>> dbt;
    for (int i = 0; i < d; ++i) {
        dBts.push_back(diff_trees(Bt[static_cast<std::size_t>(i)]));
        dBtts.push_back(diff_trees(Btt[static_cast<std::size_t>(i)]));
        std::vector<expr::NodePtr> row;
        for (int j = 0; j < d; ++j) row.push_back(expr::diff(bt[static_cast<std::size_t>(i)], j));
        dbt.push_back(row);
    }

    s.Q = [Qt, eval_mat](double t, const Vec& x) { return eval_mat(Qt, t, x); };
    s.C = [Ct, eval_mat](double t, const Vec& x) { return eval_mat(Ct, t, x); };
    for (int i = 0; i < d; ++i) {
        const Trees ti = Bt[static_cast<std::size_t>(i)];
        s.B.push_back([ti, eval_mat](double t, const Vec& x) { return eval_mat(ti, t, x); });
    }
    s.dQ = [dQt, eval_mat](double t, const Vec& x, int l) {
        return eval_mat(dQt[static_cast<std::size_t>(l)], t, x);
    };
    s.d2Q = [d2Qt, eval_mat](double t, const Vec& x, int i, int l) {
        return eval_mat(d2Qt[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)], t, x);
    };
    s.dC = [dCt, eval_mat](double t, const Vec& x, int l) {
        return eval_mat(dCt[static_cast<std::size_t>(l)], t, x);
    };
    s.dB = [dBts, eval_mat](double t, const Vec& x, int l, int i) {
        return eval_mat(dBts[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)], t, x);
    };

    s.has_decomposition = true;
    for (int i = 0; i < d; ++i) {
        const expr::NodePtr bi = bt[static_cast<std::size_t>(i)];
        s.b.push_back([bi](double t, const Vec& x) { return expr::eval(bi, t, x); });
        const Trees ti = Btt[static_cast<std::size_t>(i)];
        s.Btilde.push_back([ti, eval_mat](double t, const Vec& x) { return eval_mat(ti, t, x); });
    }
    s.db = [dbt, d](double t, const Vec& x) {
        Mat r(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                r(i, j) = expr::eval(dbt[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                     t, x);
        return r;
    };
    s.dBtilde = [dBtts, eval_mat](double t, const Vec& x, int i, int l) {
        return eval_mat(dBtts[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)], t, x);
    };

    const expr::NodePtr ktree = kt[0][0];
    s.k_bound = [ktree](double t, const Vec& x) { return expr::eval(ktree, t, x); };

    bool timedep = false;
    for (const auto& row : Qt)
        for (const auto& n : row) timedep = timedep || expr::depends_on_time(n);
    for (const auto& row : Ct)
        for (const auto& n : row) timedep = timedep || expr::depends_on_time(n);
    for (const auto& trees : Bt)
        for (const auto& row : trees)
            for (const auto& n : row) timedep = timedep || expr::depends_on_time(n);
    s.time_dependent = timedep;

    auto growth = [&](const std::string& key, PowerLaw fallback) {
        auto it = cfg.growth_decls.find(key);
        return it != cfg.growth_decls.end() ? it->second : fallback;
    };
    s.growth.lambda_Q = growth("growth_lambda_Q", {0.0, +1});
    s.growth.Lambda_Q = growth("growth_Lambda_Q", s.growth.lambda_Q);
    s.growth.Lambda_C = growth("growth_Lambda_C", {0.0, 0});
    s.growth.B_norm = growth("growth_B", {0.0, 0});
    s.growth.b_norm = growth("growth_b", {0.0, 0});
    s.growth.Btilde_norm = growth("growth_Btilde", {0.0, 0});
    s.growth.drift_radial = growth("growth_drift", {0.0, 0});
    s.growth.k_growth = growth("growth_k", {0.0, 0});
    return s;
}

/// The optional kappa of the dual route / tilde hypotheses.
inline ScalarFieldDecl build_kappa(const RunConfig& cfg) {
    ScalarFieldDecl k;
    if (cfg.kappa_expr.empty()) return k;
    const auto tree = expr::parse(cfg.kappa_expr, cfg.d);
    k.f = [tree](double t, const Vec& x) { return expr::eval(tree, t, x); };
    k.growth = cfg.kappa_growth;
    k.present = true;
    return k;
}

}  // namespace parabolica
