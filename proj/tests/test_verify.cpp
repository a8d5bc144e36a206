#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "vriesz/verify.hpp"

using namespace vriesz;

namespace {

Config parse(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in, "test.ini");
}

// Tiny settings that keep every driver under a second.
const char* kSmall = R"(
[general]
resolution = 64
resolutions = 32,64
eval_per_axis = 8
seed = 3

[weak_type]
battery = bumps:count=3
[maximal_weak_type]
battery = bumps:count=3
[tail_bound]
battery = bumps:count=3
[pointwise]
battery = bumps:count=3
[strong_type]
battery = bumps:count=3
[exponential_decay]
battery = gaussian:count=2
[poincare.disk]
battery = smooth:count=3
[exp_integrability]
battery = smooth:count=3
[chains.disk]
points = 5
)";

const std::vector<std::string> kIds{"exponential_decay", "weak_type",   "maximal_weak_type", "tail_bound",  "pointwise",
                                    "strong_type",       "poincare.disk", "exp_integrability", "chains.disk"};

}  // namespace

TEST(FitDecay, RecoversSyntheticConstants) {
    std::vector<double> t, H;
    const double c1 = 0.8, c2 = 3.0;
    for (double x = 0.05; x <= 1.0; x += 0.05) {
        t.push_back(x);
        H.push_back(c1 * std::exp(-c2 * x * x));
    }
    // H_domain = 1 drops the points with H >= 0.5.
    const DecayFit fit = fit_decay(t, H, 1.0, 2.0);
    EXPECT_NEAR(fit.c1, c1, 1e-12);
    EXPECT_NEAR(fit.c2, c2, 1e-12);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
    std::size_t expect = 0;
    for (double h : H) expect += h < 0.5;
    EXPECT_EQ(fit.points, expect);
    EXPECT_GT(fit.t_lo, 0.35);
    EXPECT_DOUBLE_EQ(fit.t_hi, t.back());
    EXPECT_EQ(fit.exponent, 2.0);
}

TEST(FitDecay, DegenerateInputs) {
    const std::vector<double> t{0.1, 0.2, 0.3}, H{0.9, 0.0, 0.7};
    const DecayFit fit = fit_decay(t, H, 1.0, 2.0);
    EXPECT_LT(fit.points, 2u);
    EXPECT_EQ(fit.r2, 0.0);
    // Noisy data lowers R^2 below one.
    std::vector<double> t2, H2;
    for (int k = 1; k <= 20; ++k) {
        t2.push_back(0.05 * k);
        H2.push_back(0.4 * std::exp(-2.0 * t2.back() * t2.back()) * (k % 2 ? 1.3 : 0.7));
    }
    const DecayFit noisy = fit_decay(t2, H2, 1.0, 2.0);
    EXPECT_LT(noisy.r2, 0.99);
    EXPECT_GT(noisy.c2, 0.0);
}

TEST(FitWindowThresholds, SpansTheDecayWindow) {
    const Grid g = make_grid(2, 16, cube_box(2, 0.0, 1.0));
    const ScalarField u = map_field(sample_field(g, "constant:value=0"), [&](double, CellIndex i) { return double(i) / 255.0; });
    // Content 1 - t, so half the domain content is reached at t = 1/2.
    const auto t = fit_window_thresholds(u, 5, 1.0, 0.9, [](double s) { return 1.0 - s; });
    ASSERT_EQ(t.size(), 5u);
    EXPECT_NEAR(t.front(), 0.5, 1e-9);
    EXPECT_NEAR(t.back(), 0.9, 1e-12);
    for (std::size_t k = 1; k < t.size(); ++k) EXPECT_NEAR(t[k] - t[k - 1], 0.1, 1e-9);
    EXPECT_TRUE(fit_window_thresholds(sample_field(g, "constant:value=0"), 5, 1.0, 0.9, [](double) { return 0.0; }).empty());
}

TEST(Config, ParsesSectionsAndTypes) {
    const Config c = parse("[general]\nseed = 7\n; comment\n[weak_type]\nresolutions = 64, 128\nbattery = bumps:count=4\n");
    EXPECT_TRUE(c.has("general"));
    const Section s = c.experiment("weak_type");
    EXPECT_EQ(s.integer("seed", 0), 7);
    EXPECT_EQ(s.numbers("resolutions", {}), (std::vector<double>{64, 128}));
    EXPECT_EQ(s.text("battery", ""), "bumps:count=4");
    EXPECT_EQ(s.number("missing", 2.5), 2.5);
    EXPECT_THROW(Section("x", {{"n", "1.5"}}).integer("n", 0), Error);
    EXPECT_THROW(Section("x", {{"n", "abc"}}).number("n", 0), Error);
}

TEST(Config, Errors) {
    try {
        parse("[general]\nseed = 1\n[oops\n");
        FAIL() << "expected a parse error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("test.ini:3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse("seed = 1\n"), Error);
    EXPECT_THROW(Config::load("/nonexistent/config.ini"), Error);
}

TEST(Dispatch, ResolvesSections) {
    const Config c = parse("[general]\nseed = 5\npoints = 9\nthresholds = 4\n[chains.disk]\nresolution = 40\n");
    const Section s = resolve_section(c, "chains.disk");
    EXPECT_EQ(s.integer("seed", 0), 5);
    EXPECT_EQ(s.integer("points", 0), 9);
    EXPECT_FALSE(s.has("thresholds"));  // not a chains key
    EXPECT_EQ(s.integer("resolution", 0), 40);

    const Section o = resolve_section(c, "chains.disk", RunOptions{80, 11});
    EXPECT_EQ(o.integer("resolution", 0), 80);
    EXPECT_EQ(o.integer("seed", 0), 11);
    const Section m = resolve_section(c, "weak_type", RunOptions{32, std::nullopt});
    EXPECT_EQ(m.numbers("resolutions", {}), (std::vector<double>{32, 64}));

    EXPECT_THROW(resolve_section(parse("[chains]\ncolour = red\n"), "chains"), Error);
    try {
        run_experiment(c, "nope");
        FAIL() << "expected an unknown-id error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("chains"), std::string::npos);
    }
}

TEST(Experiments, ZeroBatteryPassesVacuously) {
    const Report r = run_experiment(parse("[exponential_decay]\nresolution = 32\nbattery = zero:count=2\n"), "exponential_decay");
    EXPECT_TRUE(r.pass());
    ASSERT_FALSE(r.cases.empty());
    for (const auto& c : r.cases) EXPECT_TRUE(c.pass) << c.name;
}

TEST(Experiments, SmallRunsAreConsistent) {
    const Config c = parse(kSmall);
    for (const auto& id : kIds) {
        const Report r = run_experiment(c, id);
        EXPECT_EQ(r.id, id);
        EXPECT_FALSE(r.cases.empty()) << id;
        EXPECT_EQ(r.digest.size(), 16u);
        bool all = true;
        for (const auto& h : r.hypotheses) all = all && h.pass;
        for (const auto& k : r.cases) all = all && k.pass;
        const auto j = report_to_json(r);
        EXPECT_EQ(j.at("pass").get<bool>(), all) << id;
        EXPECT_EQ(j.at("cases").size(), r.cases.size());
        EXPECT_TRUE(j.contains("runtime_seconds"));
        EXPECT_FALSE(report_to_json(r, false).contains("runtime_seconds"));
    }
}

TEST(Experiments, Deterministic) {
    const Config c = parse(kSmall);
    for (const auto& id : kIds) {
        const auto a = report_to_json(run_experiment(c, id), false).dump();
        const auto b = report_to_json(run_experiment(c, id), false).dump();
        EXPECT_EQ(a, b) << id;
    }
    const auto s1 = run_experiment(c, "weak_type", RunOptions{std::nullopt, 1});
    const auto s2 = run_experiment(c, "weak_type", RunOptions{std::nullopt, 2});
    EXPECT_NE(s1.digest, s2.digest);
}

TEST(Reports, CsvAndFiles) {
    PlotTable t{"demo", {"a", "b"}, {}};
    t.add({1.0, 0.1});
    t.add({2.0, 1e-300});
    // 17 significant digits round-trip every double exactly.
    std::istringstream csv(t.to_csv());
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "a,b");
    for (const auto& row : t.rows) {
        std::getline(csv, line);
        const auto comma = line.find(',');
        EXPECT_EQ(std::stod(line.substr(0, comma)), row[0]);
        EXPECT_EQ(std::stod(line.substr(comma + 1)), row[1]);
    }
    EXPECT_THROW(t.add({1.0}), Error);

    Report r;
    r.id = "unit";
    r.digest = hex_digest(fnv1a("x"));
    r.add_case("ok", "1 <= 2", "exact", true, {{"v", 1}});
    r.plots.push_back(t);
    EXPECT_TRUE(r.pass());
    r.add_hypothesis("h", "x > 0", false);
    EXPECT_FALSE(r.pass());

    const auto dir = std::filesystem::temp_directory_path() / "vriesz_report_test";
    std::filesystem::remove_all(dir);
    const auto path = write_report(r, dir);
    std::ifstream js(path);
    const auto j = nlohmann::json::parse(js);
    EXPECT_EQ(j.at("id"), "unit");
    EXPECT_FALSE(j.at("pass").get<bool>());
    EXPECT_EQ(j.at("plot_files")[0], "demo.csv");
    std::ifstream cs(dir / "demo.csv");
    std::string header;
    std::getline(cs, header);
    EXPECT_EQ(header, "a,b");
    std::filesystem::remove_all(dir);
    EXPECT_EQ(num(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(num(std::nan("")), "nan");
    EXPECT_EQ(num(2.5), 2.5);
}

TEST(Reports, DigestUsesFnv1a) {
    // Published 64-bit FNV-1a test vectors.
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(hex_digest(0xabcULL), "0000000000000abc");
}
