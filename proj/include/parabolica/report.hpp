#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "estimates.hpp"
#include "hypotheses.hpp"

namespace parabolica {

using json = nlohmann::ordered_json;

constexpr const char* kSchemaVersion = "1";

inline json to_json(const HypothesisReport& r) {
    json j;
    j["hypothesis_id"] = r.hypothesis_id;
    j["verdict"] = to_string(r.verdict);
    j["margin"] = r.margin;
    if (r.witness) {
        json w;
        w["t"] = r.witness->t;
        w["x"] = r.witness->x.a;
        if (r.witness->eta) w["eta"] = r.witness->eta->a;
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    j["samples"] = r.samples_used;
    j["asymptotic"] = to_string(r.asymptotic);
    j["fd_used"] = r.fd_used;
    if (!r.extras.empty()) j["extras"] = r.extras;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json to_json(const EstimateReport& r) {
    json j;
    j["estimate_id"] = r.estimate_id;
    j["parameters"] = r.params;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["worst_margin"] = r.worst_margin;
    j["scale"] = r.scale;
    j["tol"] = r.tol_used;
    j["pass"] = r.pass;
    j["metadata"] = r.metadata;
    return j;
}

inline json to_json(const ConstantLedger& ledger) {
    json j;
    for (const auto& [name, e] : ledger.entries) {
        json entry;
        entry["value"] = e.value;
        entry["formula"] = e.formula;
        if (!e.inputs.empty()) entry["inputs"] = e.inputs;
        j[name] = entry;
    }
    return j;
}

/// Everything one run produced: reproducible from run_id + config alone.
struct ReportBundle {
    std::string command;
    std::uint64_t run_id = 0;
    RunConfig config;
    std::vector<HypothesisReport> hypothesis_reports;
    std::vector<EstimateReport> estimate_reports;
    ConstantLedger ledger;
    std::vector<std::string> notes;

    bool all_pass() const {
        for (const auto& h : hypothesis_reports)
            if (h.verdict == Verdict::violated) return false;
        for (const auto& e : estimate_reports)
            if (!e.pass) return false;
        return true;
    }

    json to_json() const {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = command;
        std::ostringstream id;
        id << std::hex << run_id;
        j["run_id"] = id.str();
        j["environment"] = {{"library", "parabolica"}, {"schema", kSchemaVersion}};
        json hyp = json::array();
        for (const auto& h : hypothesis_reports) hyp.push_back(parabolica::to_json(h));
        j["hypotheses"] = hyp;
        json est = json::array();
        for (const auto& e : estimate_reports) est.push_back(parabolica::to_json(e));
        j["estimates"] = est;
        j["constants"] = parabolica::to_json(ledger);
        j["notes"] = notes;
        return j;
    }
};

namespace detail {

/// temp-then-rename so readers never observe a partial file
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Emit the bundle in the selected formats under dir.
inline std::vector<std::string> emit(const ReportBundle& bundle,
                                     const std::vector<std::string>& formats,
                                     const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    fs::create_directories(dir);
    for (const auto& fmt : formats) {
        if (fmt == "json") {
            const fs::path p = fs::path(dir) / "bundle.json";
            detail::atomic_write(p, bundle.to_json().dump(2) + "\n");
            written.push_back(p.string());
            for (const auto& h : bundle.hypothesis_reports) {
                const fs::path hp = fs::path(dir) / ("hypothesis_" + h.hypothesis_id + ".json");
                detail::atomic_write(hp, to_json(h).dump(2) + "\n");
                written.push_back(hp.string());
            }
        } else if (fmt == "csv") {
            std::ostringstream os;
            os.precision(17);
            os << "estimate_id,p,q,s,t,lhs,rhs,worst_margin,pass\n";
            for (const auto& e : bundle.estimate_reports) {
                auto param = [&](const char* k) {
                    auto it = e.params.find(k);
                    return it == e.params.end() ? 0.0 : it->second;
                };
                os << e.estimate_id << "," << param("p") << "," << param("q") << ","
                   << param("s") << "," << param("t") << "," << e.lhs << "," << e.rhs << ","
                   << e.worst_margin << "," << (e.pass ? 1 : 0) << "\n";
            }
            const fs::path p = fs::path(dir) / "estimates.csv";
            detail::atomic_write(p, os.str());
            written.push_back(p.string());

            std::ostringstream hs;
            hs << "hypothesis_id,verdict,margin,asymptotic,samples\n";
            for (const auto& h : bundle.hypothesis_reports)
                hs << h.hypothesis_id << "," << to_string(h.verdict) << "," << h.margin << ","
                   << to_string(h.asymptotic) << "," << h.samples_used << "\n";
            const fs::path hp = fs::path(dir) / "hypotheses.csv";
            detail::atomic_write(hp, hs.str());
            written.push_back(hp.string());
        } else if (fmt == "plotdata") {
            for (const auto& e : bundle.estimate_reports) {
                std::ostringstream os;
                os.precision(17);
                auto param = [&](const char* k) {
                    auto it = e.params.find(k);
                    return it == e.params.end() ? 0.0 : it->second;
                };
                os << (param("t") - param("s")) << " " << e.worst_margin << "\n";
                const fs::path p = fs::path(dir) / (e.estimate_id + ".dat");
                detail::atomic_write(p, os.str());
                written.push_back(p.string());
            }
        } else {
            throw std::runtime_error("unknown output format '" + fmt + "'");
        }
    }
    return written;
}

}  // namespace parabolica
