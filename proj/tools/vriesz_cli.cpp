// Command-line driver: field operators, domain tools and the verification harness.
//
// Every subcommand reads its inputs from, in increasing precedence, the
// [general] section of --config, the section named after the subcommand, and
// the command-line flags. Field inputs are analytic specs ("gaussian:sigma=0.1")
// or "@path/to/header.json" for a stored field.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vriesz/vriesz.hpp"

namespace fs = std::filesystem;
using namespace vriesz;

namespace {

struct Common {
    std::string config;
    std::optional<int> resolution;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string format = "json";
    std::string encoding = "csv";
};

/// Key/value inputs of one subcommand after merging config and flags.
class Inputs {
public:
    Inputs(const Common& c, const std::string& command) : common_(c) {
        if (!c.config.empty()) section_ = Config::load(c.config).experiment(command);
    }

    void flag(const std::string& key, const std::string& value) {
        if (!value.empty()) section_.set(key, value);
    }

    std::string text(const std::string& key, const std::string& fallback) const { return section_.text(key, fallback); }
    double number(const std::string& key, double fallback) const { return section_.number(key, fallback); }

    int resolution(int fallback) const {
        if (common_.resolution) return *common_.resolution;
        return static_cast<int>(section_.integer("resolution", fallback));
    }

private:
    const Common& common_;
    Section section_;
};

bool is_file_ref(const std::string& s) { return !s.empty() && s[0] == '@'; }

ScalarField load_ref(const std::string& ref) { return read_field(ref.substr(1)).field; }

/// Grid and mask: taken from a stored field when one is given, else from the domain spec.
struct Support {
    Grid grid;
    Mask mask;
};

Support support_for(const Inputs& in, const std::string& field_ref, int default_res) {
    if (is_file_ref(field_ref)) {
        const ScalarField f = load_ref(field_ref);
        return {f.grid(), f.mask()};
    }
    const DomainModel D = make_domain(in.text("domain", "box:lo=0,hi=1"), in.resolution(default_res));
    return {D.grid, D.mask};
}

ScalarField field_on(const Support& s, const std::string& ref) {
    if (!is_file_ref(ref)) return sample_sum(s.grid, ref, s.mask);
    const ScalarField f = load_ref(ref);
    if (!(f.grid() == s.grid) || f.mask() != s.mask) throw Error("field " + ref + " does not share the working grid and mask");
    return f;
}

ExponentField exponent_on(const Support& s, const std::string& ref) { return ExponentField(field_on(s, ref)); }

EvalSet eval_for(const Inputs& in, const Support& s) {
    const std::string mode = in.text("eval", "stratified");
    if (mode == "all") return all_cells(s.grid, s.mask);
    if (mode == "stratified") return stratified_eval_set(s.grid, s.mask, static_cast<int>(in.number("eval_per_axis", 0)));
    throw Error("eval must be 'all' or 'stratified'");
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw Error("cannot write " + p.string());
    os << text;
}

/// Writes the summary in the requested format and echoes its path.
void emit(const Common& c, const std::string& name, const nlohmann::json& summary, const PlotTable& table) {
    const fs::path dir(c.out);
    fs::path p;
    if (c.format == "json") {
        p = dir / (name + ".json");
        write_text(p, summary.dump(2) + "\n");
    } else {
        p = dir / (name + ".csv");
        write_text(p, table.to_csv());
    }
    std::cout << p.string() << "\n";
}

PlotTable field_table(const std::string& name, const ScalarField& f) {
    PlotTable t{name, f.grid().dim() == 3 ? std::vector<std::string>{"x0", "x1", "x2", "value"}
                                           : std::vector<std::string>{"x0", "x1", "value"},
                {}};
    for (CellIndex i = 0; i < f.grid().cell_count(); ++i) {
        if (!f.masked(i)) continue;
        const Point p = f.grid().center(i);
        std::vector<double> row(p.begin(), p.begin() + f.grid().dim());
        row.push_back(f[i]);
        t.add(std::move(row));
    }
    return t;
}

nlohmann::json field_summary(const ScalarField& f, const fs::path& header) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (CellIndex i = 0; i < f.grid().cell_count(); ++i) {
        if (!f.masked(i)) continue;
        lo = first ? f[i] : std::min(lo, f[i]);
        hi = first ? f[i] : std::max(hi, f[i]);
        first = false;
    }
    return {{"grid", grid_to_json(f.grid())}, {"min", lo}, {"max", hi}, {"integral", integrate(f)},
            {"field_file", header.filename().string()}};
}

int run_potential(const Common& c, const std::string& f_ref, const std::string& alpha_ref, const std::string& eval,
                  const std::string& domain) {
    Inputs in(c, "potential");
    in.flag("f", f_ref);
    in.flag("alpha", alpha_ref);
    in.flag("eval", eval);
    in.flag("domain", domain);
    const std::string fr = in.text("f", "gaussian:cx=0.5,cy=0.5,sigma=0.1");
    const Support s = support_for(in, fr, 128);
    const ScalarField f = field_on(s, fr);
    const ExponentField alpha = exponent_on(s, in.text("alpha", "constant:value=1"));
    const EvalSet ev = eval_for(in, s);
    const ScalarField I = extend_nearest(s.grid, s.mask, ev, riesz_potential(f, alpha, ev));
    const auto header = write_field(I, fs::path(c.out) / "potential", "riesz_potential", parse_encoding(c.encoding));
    auto summary = field_summary(I, header);
    summary["eval_points"] = ev.size();
    emit(c, "potential_summary", summary, field_table("potential", I));
    return 0;
}

int run_maximal(const Common& c, const std::string& f_ref, const std::string& alpha_ref, const std::string& domain) {
    Inputs in(c, "maximal");
    in.flag("f", f_ref);
    in.flag("alpha", alpha_ref);
    in.flag("domain", domain);
    const std::string fr = in.text("f", "gaussian:cx=0.5,cy=0.5,sigma=0.1");
    const Support s = support_for(in, fr, 128);
    const ScalarField f = field_on(s, fr);
    const ExponentField alpha = exponent_on(s, in.text("alpha", "constant:value=1"));
    const RadiusLadder ladder = default_ladder(s.grid, s.mask, in.number("ratio", std::sqrt(2.0)));
    const ScalarField M = fractional_maximal(f, alpha, ladder);
    const auto header = write_field(M, fs::path(c.out) / "maximal", "fractional_maximal", parse_encoding(c.encoding));
    auto summary = field_summary(M, header);
    summary["radii"] = ladder.radii.size();
    emit(c, "maximal_summary", summary, field_table("maximal", M));
    return 0;
}

int run_content(const Common& c, const std::string& f_ref, const std::string& beta_ref, const std::string& method,
                const std::string& domain, std::optional<double> threshold) {
    Inputs in(c, "content");
    in.flag("f", f_ref);
    in.flag("beta", beta_ref);
    in.flag("method", method);
    in.flag("domain", domain);
    if (threshold) in.flag("threshold", std::to_string(*threshold));
    // Without f the set is the whole domain.
    const std::string fr = in.text("f", "");
    const Support s = support_for(in, fr, 128);
    Mask E = s.mask;
    if (!fr.empty()) {
        const ScalarField f = field_on(s, fr);
        const double t = in.number("threshold", 0.0);
        for (CellIndex i = 0; i < E.size(); ++i) E[i] = s.mask[i] && f[i] > t;
    }
    const ExponentField beta = exponent_on(s, in.text("beta", "constant:value=1"));
    const std::string m = in.text("method", "dyadic");
    ContentEstimate e;
    if (m == "dyadic") {
        e = dyadic_content(E, beta, static_cast<int>(in.number("depth", default_depth(s.grid))));
    } else if (m == "greedy") {
        e = greedy_content(E, beta);
    } else {
        throw Error("method must be 'dyadic' or 'greedy'");
    }
    const int dim = s.grid.dim();
    write_text(fs::path(c.out) / "cover.csv", cover_to_csv(e.cover, dim));
    PlotTable t{"content", {"value", "balls", "cells"}, {}};
    t.add({e.value, static_cast<double>(e.cover.balls.size()), static_cast<double>(count_cells(E))});
    auto j = content_to_json(e, dim);
    j["cells"] = count_cells(E);
    emit(c, "content", j, t);
    return 0;
}

int run_norm(const Common& c, const std::string& f_ref, const std::string& p_ref, const std::string& domain) {
    Inputs in(c, "norm");
    in.flag("f", f_ref);
    in.flag("p", p_ref);
    in.flag("domain", domain);
    const std::string fr = in.text("f", "constant:value=1");
    const Support s = support_for(in, fr, 128);
    const ScalarField f = field_on(s, fr);
    const ExponentField p = exponent_on(s, in.text("p", "constant:value=2"));
    const NormResult r = luxemburg_norm(f, p);
    PlotTable t{"norm", {"value", "iterations", "residual", "modular"}, {}};
    const double rho = modular(f, p);
    t.add({r.value, static_cast<double>(r.iterations), r.residual, rho});
    emit(c, "norm",
         {{"value", r.value}, {"iterations", r.iterations}, {"residual", r.residual}, {"modular", rho},
          {"p_lo", p.lo()}, {"p_hi", p.hi()}},
         t);
    return 0;
}

Point parse_point(const std::string& text, int dim) {
    Point p{0.0, 0.0, 0.0};
    std::stringstream ss(text);
    std::string item;
    int a = 0;
    while (std::getline(ss, item, ',')) {
        if (a >= dim) throw Error("point has more than " + std::to_string(dim) + " coordinates");
        p[a++] = parse_double(trim(item), "point");
    }
    if (a != dim) throw Error("point needs " + std::to_string(dim) + " coordinates");
    return p;
}

int run_chain(const Common& c, const std::string& domain, const std::string& point) {
    Inputs in(c, "chain");
    in.flag("domain", domain);
    in.flag("point", point);
    const DomainModel D = make_domain(in.text("domain", "disk:radius=1"), in.resolution(256));
    const Point x = parse_point(in.text("point", "0.5,0.5"), D.grid.dim());
    if (!D.mask[D.grid.index(D.grid.locate(x))]) throw Error("point lies outside the domain");
    const BallChain ch = build_chain(D, x);
    const ChainReport r = chain_check(ch, D);
    const int dim = D.grid.dim();
    PlotTable t{"chain", dim == 3 ? std::vector<std::string>{"x0", "x1", "x2", "radius", "shrunk"}
                                  : std::vector<std::string>{"x0", "x1", "radius", "shrunk"},
                {}};
    nlohmann::json balls = nlohmann::json::array();
    for (const auto& b : ch.balls) {
        std::vector<double> row(b.center.begin(), b.center.begin() + dim);
        row.push_back(b.radius);
        row.push_back(b.shrunk ? 1.0 : 0.0);
        t.add(row);
        balls.push_back({{"center", detail::point_json(b.center, dim)}, {"radius", b.radius}, {"shrunk", b.shrunk}});
    }
    write_text(fs::path(c.out) / "chain_balls.csv", t.to_csv());
    emit(c, "chain",
         {{"terminal", detail::point_json(x, dim)}, {"balls", balls}, {"K", num(r.K)}, {"N", num(r.N)}, {"M", num(r.M)},
          {"n_ceiling", r.n_ceiling}, {"contained", r.contained}, {"tail_monotone", r.tail_monotone}, {"reached", r.reached}, {"pass", r.pass}},
         t);
    return r.pass ? 0 : 1;
}

int run_domain(const Common& c, const std::string& domain) {
    Inputs in(c, "domain");
    in.flag("domain", domain);
    const DomainModel D = make_domain(in.text("domain", "disk:radius=1"), in.resolution(256));
    const auto enc = parse_encoding(c.encoding);
    std::vector<double> m(D.grid.cell_count());
    for (CellIndex i = 0; i < m.size(); ++i) m[i] = D.mask[i] ? 1.0 : 0.0;
    write_field(ScalarField(D.grid, m, full_mask(D.grid)), fs::path(c.out) / "domain_mask", "mask", enc);
    write_field(D.dist, fs::path(c.out) / "domain_dist", "distance", enc);
    write_field(D.s_field.field(), fs::path(c.out) / "domain_s", "s", enc);
    emit(c, "domain", D.manifest, field_table("domain_dist", D.dist));
    return 0;
}

int run_verify(const Common& c, const std::string& id) {
    const Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
    const Report r = run_experiment(cfg, id, RunOptions{c.resolution, c.seed});
    const auto path = write_report(r, c.out);
    if (c.format == "csv") {
        PlotTable t{r.id + "_cases", {"index", "pass"}, {}};
        for (std::size_t k = 0; k < r.cases.size(); ++k) t.add({static_cast<double>(k), r.cases[k].pass ? 1.0 : 0.0});
        write_text(fs::path(c.out) / (t.name + ".csv"), t.to_csv());
    }
    std::cout << path.string() << "\n";
    for (const auto& h : r.hypotheses)
        if (!h.pass) std::cerr << "hypothesis failed: " << h.name << " (" << h.check << ")\n";
    for (const auto& k : r.cases)
        if (!k.pass) std::cerr << "case failed: " << k.name << " (" << k.check << ")\n";
    std::cerr << r.id << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
    return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-order Riesz potentials, maximal functions and Hausdorff content"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config, "Key-value config file")->check(CLI::ExistingFile);
    app.add_option("--resolution", common.resolution, "Cells per axis")->check(CLI::PositiveNumber);
    app.add_option("--seed", common.seed, "Battery seed");
    app.add_option("--out", common.out, "Output directory")->capture_default_str();
    app.add_option("--format", common.format, "Summary format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--encoding", common.encoding, "Field data encoding")
        ->check(CLI::IsMember({"csv", "binary"}))
        ->capture_default_str();

    std::string f, alpha, beta, p, eval, method, domain, point, id;
    std::optional<double> threshold;
    auto field_opts = [&](CLI::App* sub) {
        sub->add_option("--domain", domain, "Domain spec, e.g. disk:radius=1");
        sub->add_option("-f,--field", f, "Input field: analytic spec or @header.json");
    };

    auto* pot = app.add_subcommand("potential", "Riesz potential of variable order");
    field_opts(pot);
    pot->add_option("--alpha", alpha, "Order alpha(x)");
    pot->add_option("--eval", eval, "Evaluation set: stratified or all");
    auto* mx = app.add_subcommand("maximal", "Fractional maximal function of variable order");
    field_opts(mx);
    mx->add_option("--alpha", alpha, "Order alpha(x)");
    auto* ct = app.add_subcommand("content", "Variable-dimensional Hausdorff content of a set");
    field_opts(ct);
    ct->add_option("--beta", beta, "Dimension beta(x)");
    ct->add_option("--threshold", threshold, "Set is {f > threshold}; the whole domain without --field");
    ct->add_option("--method", method, "dyadic or greedy");
    auto* nm = app.add_subcommand("norm", "Luxemburg norm in L^{p(.)}");
    field_opts(nm);
    nm->add_option("--p", p, "Exponent p(x)");
    auto* ch = app.add_subcommand("chain", "Chain of balls from the John centre to a point");
    ch->add_option("--domain", domain, "Domain spec");
    ch->add_option("--point", point, "Terminal point x,y");
    auto* dm = app.add_subcommand("domain", "Domain mask, distance field and manifest");
    dm->add_option("--domain", domain, "Domain spec");
    auto* vf = app.add_subcommand("verify", "Run one verification experiment");
    vf->add_option("experiment", id, "Experiment id, e.g. poincare.disk")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*pot) return run_potential(common, f, alpha, eval, domain);
        if (*mx) return run_maximal(common, f, alpha, domain);
        if (*ct) return run_content(common, f, beta, method, domain, threshold);
        if (*nm) return run_norm(common, f, p, domain);
        if (*ch) return run_chain(common, domain, point);
        if (*dm) return run_domain(common, domain);
        if (*vf) return run_verify(common, id);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
