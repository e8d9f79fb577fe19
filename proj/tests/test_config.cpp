#include <gtest/gtest.h>

#include "parabolica/config.hpp"
#include "parabolica/run.hpp"

using namespace parabolica;

TEST(Config, MinimalHeatConfigFillsDefaults) {
    auto cfg = RunConfig::parse("[spec]\nfamily = expr\n");
    EXPECT_EQ(cfg.d, 1);
    EXPECT_EQ(cfg.m, 1);
    EXPECT_EQ(cfg.theta, 1.0);
    EXPECT_EQ(cfg.bc, "dirichlet");
    auto spec = build_spec(cfg);  // defaults to the 1-D heat equation
    EXPECT_DOUBLE_EQ(spec.eval_Q(0.0, Vec{0.3})(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(spec.eval_C(0.0, Vec{0.3})(0, 0), 0.0);
    EXPECT_FALSE(spec.time_dependent);
}

TEST(Config, DiagnosticsCarryLineAndKey) {
    const std::string text =
        "[spec]\n"
        "family = ex1\n"
        "nonsense = 3\n"
        "[time]\n"
        "dt = frogs\n";
    try {
        RunConfig::parse(text);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        ASSERT_GE(e.diagnostics.size(), 2u);
        EXPECT_EQ(e.diagnostics[0].line, 3);
        EXPECT_EQ(e.diagnostics[0].key, "nonsense");
        bool found_dt = false;
        for (const auto& d : e.diagnostics) found_dt = found_dt || d.key == "dt";
        EXPECT_TRUE(found_dt);
    }
}

TEST(Config, DuplicateKeysRejected) {
    EXPECT_THROW(RunConfig::parse("[time]\ndt = 0.1\ndt = 0.2\n"), ConfigError);
}

TEST(Config, ConstraintViolationsSurfaceButStillBuild) {
    const std::string text =
        "[spec]\n"
        "family = ex1\n"
        "d = 2\n"
        "m = 2\n"
        "a = 1\n"
        "b = 1\n";
    auto cfg = RunConfig::parse(text);
    auto spec = build_spec(cfg);
    EXPECT_TRUE(spec.constraints_violated);
}

TEST(Config, RoundTripIsIdentityOnValidatedStructure) {
    const std::string text =
        "[spec]\n"
        "family = ex1\n"
        "d = 2\n"
        "m = 2\n"
        "a = 1\n"
        "b = 3\n"
        "kappa = -(|x|^2)^2.5\n"
        "kappa_growth = 5 -\n"
        "[grid]\n"
        "radius = 4\n"
        "h = 0.125\n"
        "[time]\n"
        "s = 0\n"
        "t = 0.1\n"
        "dt = 0.005\n"
        "[check]\n"
        "hypotheses = ellipticity,K_nonneg\n"
        "p = 1.5,2,4\n"
        "[sampling]\n"
        "seed = 7\n";
    auto cfg = RunConfig::parse(text);
    auto cfg2 = RunConfig::parse(cfg.serialize());
    EXPECT_EQ(cfg.raw, cfg2.raw);
    EXPECT_EQ(cfg.serialize(), cfg2.serialize());
    EXPECT_EQ(cfg.run_id(), cfg2.run_id());
    EXPECT_EQ(cfg.p_list, (std::vector<double>{1.5, 2.0, 4.0}));
    EXPECT_EQ(cfg.seed, 7u);
}

TEST(Config, MatrixLiteralsAndExpressionCoefficients) {
    const std::string text =
        "[spec]\n"
        "family = expr\n"
        "d = 1\n"
        "m = 2\n"
        "Q11 = 1\n"
        "C11 = -1\n"
        "C22 = -2\n"
        "B1_12 = 0.5\n"
        "B1_21 = 0.5\n"
        "b1 = 0\n"
        "growth_Lambda_C = 0 -\n";
    auto cfg = RunConfig::parse(text);
    auto spec = build_spec(cfg);
    const Mat C = spec.eval_C(0.0, Vec{0.2});
    EXPECT_DOUBLE_EQ(C(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(C(1, 1), -2.0);
    const Mat B = spec.eval_B(0.0, Vec{0.2}, 0);
    EXPECT_DOUBLE_EQ(B(0, 1), 0.5);
    EXPECT_EQ(spec.growth.Lambda_C.sign, -1);

    const std::string bad = "[spec]\nfamily = expr\nChat = 1 0; 0\n";
    EXPECT_THROW(RunConfig::parse(bad), ConfigError);
}

TEST(Config, RejectsInvalidScalars) {
    EXPECT_THROW(RunConfig::parse("[time]\ndt = -1\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("[time]\ntheta = 2\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("[evolve]\nbc = periodic\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("[spec]\nfamily = ex9\n"), ConfigError);
}

TEST(Run, ExamplesCommandListsCatalogue) {
    auto bundle = run("examples", RunConfig{});
    ASSERT_EQ(bundle.notes.size(), 2u);
    EXPECT_NE(bundle.notes[0].find("ex1"), std::string::npos);
    EXPECT_NE(bundle.notes[1].find("ex2"), std::string::npos);
}

TEST(Run, DeterministicBundles) {
    const std::string text =
        "[spec]\n"
        "family = ex1\n"
        "d = 2\n"
        "m = 2\n"
        "a = 1\n"
        "b = 3\n"
        "[check]\n"
        "hypotheses = ellipticity,K_nonneg\n"
        "[sampling]\n"
        "box_radius = 3\n"
        "points_per_dim = 7\n"
        "time_samples = 2\n";
    auto cfg = RunConfig::parse(text);
    const auto b1 = run("check", cfg);
    const auto b2 = run("check", cfg);
    EXPECT_EQ(b1.to_json().dump(), b2.to_json().dump());
}

TEST(Run, EmitWritesSelectedFormats) {
    namespace fs = std::filesystem;
    const std::string text =
        "[spec]\n"
        "family = ex1\n"
        "d = 2\n"
        "m = 2\n"
        "[check]\n"
        "hypotheses = ellipticity\n"
        "[sampling]\n"
        "box_radius = 2\n"
        "points_per_dim = 5\n"
        "time_samples = 1\n";
    auto cfg = RunConfig::parse(text);
    auto bundle = run("check", cfg);
    const std::string dir = (fs::temp_directory_path() / "parabolica_emit_test").string();
    fs::remove_all(dir);
    auto files = emit(bundle, {"json", "csv", "plotdata"}, dir);
    EXPECT_TRUE(fs::exists(fs::path(dir) / "bundle.json"));
    EXPECT_TRUE(fs::exists(fs::path(dir) / "hypothesis_ellipticity.json"));
    EXPECT_TRUE(fs::exists(fs::path(dir) / "estimates.csv"));
    fs::remove_all(dir);
}
