#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphwalk/fibers.hpp"
#include "graphwalk/graph.hpp"
#include "graphwalk/isoperimetry.hpp"
#include "graphwalk/partition.hpp"
#include "graphwalk/percolation.hpp"
#include "graphwalk/product_kernel.hpp"
#include "graphwalk/records.hpp"
#include "graphwalk/verify.hpp"
#include "graphwalk/walk.hpp"
#include "graphwalk/wreath.hpp"

namespace gw = graphwalk;

namespace {

struct CommonOpts {
    std::string family = "wreath";
    double alpha = 1.0 / 3.0;
    double beta = -1.0;  // <0: derive from alpha
    int levels = 16;
    int d = 2;
    double p = 0.7;
    double lambda = 1.0;
    std::int64_t cycle_l = 4;
    std::string n_grid = "16,32,64,128";
    std::int64_t samples = 20000;
    std::uint64_t seed = 1;
    bool exact = false;
    bool plain = false;  // fait0 without the bridge
    int workers = 1;
    std::int64_t budget = 2'000'000;
    std::string out;
};

std::vector<std::int64_t> parse_grid(const std::string& grid) {
    std::vector<std::int64_t> out;
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoll(item));
    }
    if (out.empty()) throw gw::Error("empty n grid");
    return out;
}

// Output stream: --out path (resolved against GRAPHWALK_OUT when relative),
// stdout otherwise.
class OutputTarget {
  public:
    explicit OutputTarget(const std::string& path) {
        if (path.empty()) return;
        std::string full = path;
        const char* base = std::getenv("GRAPHWALK_OUT");
        if (base != nullptr && !path.empty() && path[0] != '/')
            full = std::string(base) + "/" + path;
        file_ = std::make_unique<std::ofstream>(full);
        if (!*file_) throw gw::Error("cannot open output file " + full);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

std::string exact_record(std::int64_t n, const gw::Rational& value,
                         const std::string& family,
                         const std::string& config) {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["estimate"] = gw::to_double(value);
    j["stderr"] = 0.0;
    j["method"] = "exact-dp";
    j["samples"] = 1;
    j["seed"] = 0;
    j["family"] = family;
    j["config"] = config;
    std::ostringstream exact;
    exact << value;
    j["exact"] = exact.str();
    return j.dump();
}

std::string canonical_config(const CommonOpts& o, const std::string& cmd) {
    gw::KeyValueConfig cfg;
    cfg.set("cmd", cmd);
    cfg.set("family", o.family);
    cfg.set("alpha", std::to_string(o.alpha));
    cfg.set("beta", std::to_string(o.beta));
    cfg.set("levels", std::to_string(o.levels));
    cfg.set("d", std::to_string(o.d));
    cfg.set("p", std::to_string(o.p));
    cfg.set("lambda", std::to_string(o.lambda));
    cfg.set("l", std::to_string(o.cycle_l));
    cfg.set("n_grid", o.n_grid);
    cfg.set("samples", std::to_string(o.samples));
    cfg.set("seed", std::to_string(o.seed));
    cfg.set("exact", o.exact ? "1" : "0");
    cfg.set("plain", o.plain ? "1" : "0");
    return gw::config_hash(cfg.canonical());
}

double beta_of(const CommonOpts& o) {
    return o.beta >= 0.0 ? o.beta : 2.0 * o.alpha / (1.0 - o.alpha);
}

int cmd_return_prob(const CommonOpts& o) {
    OutputTarget out(o.out);
    const auto grid = parse_grid(o.n_grid);
    const std::string config = canonical_config(o, "return-prob");
    const std::int64_t n_max = *std::max_element(grid.begin(), grid.end());

    // Shared state across the grid for the wreath families.
    std::unique_ptr<gw::DyadicPartition> part;
    std::unique_ptr<gw::LazyWreathReturnEstimator> wreath_est;
    if (o.family == "genwreath") {
        part = std::make_unique<gw::DyadicPartition>(
            gw::DyadicPartition::build(
                gw::GrowthFunction::power(beta_of(o)), o.levels));
    }
    if (!o.exact && o.family == "wreath") {
        wreath_est = std::make_unique<gw::LazyWreathReturnEstimator>(
            gw::LazyWreathReturnEstimator::ordinary(
                gw::FiberFamily::from_alpha(o.alpha), n_max));
    } else if (!o.exact && o.family == "genwreath") {
        wreath_est = std::make_unique<gw::LazyWreathReturnEstimator>(
            gw::LazyWreathReturnEstimator::generalized(*part, 2, n_max));
    }

    for (const std::int64_t n : grid) {
        if (o.family == "cycle" || o.family == "line") {
            if (o.exact) {
                gw::Rational value;
                if (o.family == "cycle") {
                    value = gw::fiber_return_prob_exact(o.cycle_l, n);
                } else {
                    gw::LineGraph g;
                    auto dist = gw::propagate_lazy<gw::Rational>(
                        g,
                        gw::SparseDistribution<std::int64_t,
                                               gw::Rational>::point(0),
                        n, std::size_t(o.budget));
                    value = dist.at(0);
                }
                out.stream() << exact_record(n, value, o.family, config)
                             << '\n';
            } else {
                gw::Welford acc;
                gw::Rng rng = gw::Rng::for_worker(o.seed, 0);
                for (std::int64_t s = 0; s < o.samples; ++s) {
                    if (o.family == "cycle") {
                        gw::CycleGraph g(o.cycle_l);
                        auto walk = gw::simulate(g, 0, n, rng, true);
                        acc.add(walk.trace.back() == 0 ? 1.0 : 0.0);
                    } else {
                        gw::LineGraph g;
                        auto walk = gw::simulate(g, std::int64_t(0), n, rng,
                                                 true);
                        acc.add(walk.trace.back() == 0 ? 1.0 : 0.0);
                    }
                }
                gw::ReturnEstimate est;
                est.n = n;
                est.estimate = acc.mean;
                est.stderr_est = acc.stderr_of_mean();
                est.method = "naive-mc";
                est.samples = o.samples;
                est.seed = o.seed;
                out.stream()
                    << gw::return_estimate_record(est, config, o.family)
                    << '\n';
            }
        } else if (o.family == "wreath" || o.family == "genwreath") {
            const bool ordinary = o.family == "wreath";
            if (o.exact) {
                gw::Rational value;
                if (ordinary) {
                    gw::OrdinaryWreathGraph g(
                        gw::FiberFamily::from_alpha(o.alpha));
                    auto dist = gw::propagate_lazy<gw::Rational>(
                        g,
                        gw::SparseDistribution<gw::WreathVertex,
                                               gw::Rational>::
                            point(gw::wreath_origin()),
                        n, std::size_t(o.budget));
                    value = dist.at(gw::wreath_origin());
                } else {
                    gw::GeneralizedWreathGraph g(*part, 2);
                    auto dist = gw::propagate_lazy<gw::Rational>(
                        g,
                        gw::SparseDistribution<gw::WreathVertex,
                                               gw::Rational>::
                            point(gw::wreath_origin()),
                        n, std::size_t(o.budget));
                    value = dist.at(gw::wreath_origin());
                }
                out.stream() << exact_record(n, value, o.family, config)
                             << '\n';
            } else {
                const auto est = wreath_est->estimate(
                    n, o.samples, !o.plain, o.seed, o.workers);
                out.stream()
                    << gw::return_estimate_record(est, config, o.family)
                    << '\n';
            }
        } else if (o.family == "cluster") {
            auto cluster = gw::sample_cluster(
                o.d, std::max<std::int64_t>(8, n), o.p, o.seed);
            if (o.exact) {
                gw::ProductKernel<gw::ClusterGraph> kernel(
                    cluster, gw::FiberAssignment::family(
                                 gw::FiberFamily::from_alpha(o.alpha)));
                const auto value = gw::exact_product_return<gw::Rational>(
                    kernel, cluster.origin(), n, std::size_t(o.budget));
                out.stream() << exact_record(n, value, o.family, config)
                             << '\n';
            } else {
                const gw::FiberFamily fam =
                    gw::FiberFamily::from_alpha(o.alpha);
                gw::FiberReturnTable tables(fam, 2 * n_max + 2,
                                            2 * n_max + 2);
                const auto est = gw::fait0_estimate_finite(
                    cluster, cluster.size(),
                    gw::FiberAssignment::family(fam), tables,
                    gw::Fait0Convention::kArrivalsDepartures,
                    cluster.origin(), n, o.samples, !o.plain, o.seed);
                out.stream()
                    << gw::return_estimate_record(est, config, o.family)
                    << '\n';
            }
        } else {
            throw gw::Error("unknown family " + o.family);
        }
    }
    return 0;
}

int cmd_folner(const CommonOpts& o, std::int64_t window, std::int64_t k_max,
               const std::string& mode) {
    OutputTarget out(o.out);
    for (std::int64_t k = 1; k <= k_max; ++k) {
        nlohmann::ordered_json j;
        j["k"] = k;
        if (o.family == "line") {
            gw::LineGraph g;
            std::vector<std::int64_t> win;
            for (std::int64_t v = -window; v <= window; ++v)
                win.push_back(v);
            const auto res =
                mode == "exhaustive"
                    ? gw::folner_exhaustive(g, win, k, o.budget)
                    : gw::folner_connected(g, win, k, o.budget);
            j["family"] = "line";
            j["window"] = window;
            j["feasible"] = res.feasible;
            j["value"] = res.min_size;
            j["caveat_connected_only"] = res.connected_only_caveat;
        } else if (o.family == "cycle") {
            gw::CycleGraph g(o.cycle_l);
            std::vector<std::int64_t> win;
            for (std::int64_t v = 0; v < o.cycle_l; ++v) win.push_back(v);
            const auto res = gw::folner_connected(g, win, k, o.budget);
            j["family"] = "cycle";
            j["l"] = o.cycle_l;
            j["feasible"] = res.feasible;
            j["value"] = res.min_size;
        } else if (o.family == "wreath") {
            const auto wb = gw::wreath_interval_witness(
                gw::FiberFamily::from_alpha(o.alpha), k);
            j["family"] = "wreath";
            j["witness"] = wb.description;
            j["log2_size"] = wb.log2_size;
            j["max_k"] = wb.max_k;
        } else if (o.family == "genwreath") {
            const auto part = gw::DyadicPartition::build(
                gw::GrowthFunction::power(beta_of(o)), o.levels);
            const auto wb = gw::generalized_wreath_witness(part, 2, k);
            j["family"] = "genwreath";
            j["witness"] = wb.description;
            j["log2_size"] = wb.log2_size;
            j["max_k"] = wb.max_k;
        } else {
            throw gw::Error("folner: unsupported family " + o.family);
        }
        out.stream() << j.dump() << '\n';
    }
    return 0;
}

int cmd_coulhon(const CommonOpts& o, const std::string& form,
                double t_max) {
    OutputTarget out(o.out);
    gw::OdeBoundSpec spec;
    spec.m0 = 1.0;
    if (form == "power") {
        const int d = o.d;
        spec.log_f = [d](double x) {
            return x <= 0 ? -1e300 : double(d) * std::log(x);
        };
    } else if (form == "exp") {
        spec.log_f = [](double x) { return x; };
    } else if (form == "stretched") {
        const double beta = beta_of(o);
        spec.log_f = [beta](double x) {
            return x <= 0 ? 0.0 : std::pow(x, beta);
        };
    } else {
        throw gw::Error("coulhon: unknown form " + form);
    }
    std::vector<double> grid;
    for (double t = 1.0; t <= t_max * 1.0000001; t *= std::sqrt(2.0))
        grid.push_back(t);
    const auto v = gw::coulhon_bound(spec, grid);
    out.stream() << gw::series_csv_header() << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.stream() << gw::series_csv_row(grid[i], v[i]) << '\n';
    return 0;
}

int cmd_partition(const CommonOpts& o, std::int64_t scan_k,
                  std::int64_t scan_m, const std::string& dump_path) {
    OutputTarget out(o.out);
    const auto g = gw::GrowthFunction::power(beta_of(o));
    const auto part = gw::DyadicPartition::build(g, o.levels);
    if (!dump_path.empty()) {
        std::ofstream dump(dump_path);
        if (!dump) throw gw::Error("cannot open dump file " + dump_path);
        part.dump(dump);
    }
    bool exact_counts = true;
    for (int s = 0; s <= o.levels; ++s) {
        const auto st = part.window_stats(1, std::int64_t(1) << s);
        if (st.classes_touched != g(std::int64_t(1) << s))
            exact_counts = false;
    }
    const auto ratio = part.check_ratio(scan_k, scan_m);
    const auto bounds = part.check_growth_bounds(g, scan_k, scan_m);
    nlohmann::ordered_json j;
    j["beta"] = beta_of(o);
    j["levels"] = o.levels;
    j["classes"] = part.class_count();
    j["dyadic_counts_exact"] = exact_counts;
    j["max_dyadic_ratio"] = ratio.max_dyadic_ratio();
    j["max_window_ratio"] = ratio.max_window_ratio();
    j["worst_window_k"] = ratio.worst_k;
    j["worst_window_m"] = ratio.worst_m;
    j["growth_bounds_ok"] = bounds.ok;
    j["windows_scanned"] = ratio.windows_scanned;
    out.stream() << j.dump() << '\n';
    const bool ok = exact_counts && ratio.dyadic_within(2) && bounds.ok;
    return ok ? 0 : 1;
}

int cmd_percolation(const CommonOpts& o, int replicates) {
    OutputTarget out(o.out);
    const auto grid = parse_grid(o.n_grid);
    const auto trend =
        gw::exponent_trend(o.d, o.p, o.alpha, o.lambda, grid, replicates,
                           o.samples, o.seed);
    for (const auto& pt : trend.series) {
        nlohmann::ordered_json j;
        j["n"] = pt.n;
        j["estimate"] = pt.estimate;
        j["stderr"] = pt.stderr_est;
        j["method"] = "smc";
        j["samples"] = o.samples;
        j["seed"] = o.seed;
        out.stream() << j.dump() << '\n';
    }
    nlohmann::ordered_json j;
    j["eta_hat"] = trend.eta_hat;
    j["eta_stderr"] = trend.eta_stderr;
    j["target"] = trend.target;
    j["r2"] = trend.fit.r2;
    out.stream() << j.dump() << '\n';
    return 0;
}

int cmd_verify(std::uint64_t seed) {
    const auto results = gw::run_verify_battery(seed);
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  ("
                  << r.detail << ")\n";
        all = all && r.pass;
    }
    std::cout << (all ? "verify: all checks passed"
                      : "verify: FAILURES present")
              << std::endl;
    return all ? 0 : 1;
}

int cmd_fit(const std::string& in_path) {
    std::ifstream in(in_path);
    if (!in) throw gw::Error("cannot open " + in_path);
    std::vector<gw::SeriesPoint> series;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        if (!j.contains("n") || !j.contains("estimate")) continue;
        gw::SeriesPoint pt;
        pt.n = j["n"].get<double>();
        pt.estimate = j["estimate"].get<double>();
        pt.stderr_est = j.value("stderr", 0.0);
        series.push_back(pt);
    }
    const auto fit = gw::fit_stretched_exponent(series);
    nlohmann::ordered_json j;
    j["alpha_hat"] = fit.alpha_hat;
    j["alpha_stderr"] = fit.alpha_stderr;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
    j["curvature"] = fit.curvature;
    j["polynomial_decay"] = fit.polynomial_decay;
    std::cout << j.dump() << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "graphwalk: wreath-product graphs, lazy walks, percolation "
        "functionals"};
    app.set_config("--config", "", "key=value config file");

    CommonOpts o;
    app.add_option("--family", o.family,
                   "wreath|genwreath|cluster|cycle|line");
    app.add_option("--alpha", o.alpha, "stretched exponent target");
    app.add_option("--beta", o.beta, "growth exponent (default 2a/(1-a))");
    app.add_option("--levels", o.levels, "partition levels S");
    app.add_option("--d", o.d, "lattice dimension");
    app.add_option("--p", o.p, "bond retention probability");
    app.add_option("--lambda", o.lambda, "functional weight");
    app.add_option("--l", o.cycle_l, "cycle size");
    app.add_option("--n-grid", o.n_grid, "comma-separated time grid");
    app.add_option("--samples", o.samples, "samples or particles");
    app.add_option("--seed", o.seed, "master seed");
    app.add_flag("--exact", o.exact, "exact rational propagation");
    app.add_flag("--plain", o.plain, "fait0 without bridge conditioning");
    app.add_option("--workers", o.workers, "worker threads");
    app.add_option("--budget", o.budget, "state/search budget");
    app.add_option("--out", o.out, "output path (default stdout)");

    auto* rp = app.add_subcommand("return-prob", "return probabilities");
    auto* fol = app.add_subcommand("folner", "Foelner values and witnesses");
    std::int64_t window = 50, k_max = 10;
    std::string mode = "connected";
    fol->add_option("--window", window, "window radius");
    fol->add_option("--k-max", k_max, "largest k");
    fol->add_option("--mode", mode, "connected|exhaustive");
    auto* cou = app.add_subcommand("coulhon", "ODE upper-bound curve");
    std::string form = "power";
    double t_max = 1e6;
    cou->add_option("--form", form, "power|exp|stretched");
    cou->add_option("--t-max", t_max, "curve end");
    auto* par = app.add_subcommand("partition", "build + invariant scan");
    std::int64_t scan_k = 1024, scan_m = 256;
    std::string dump_path;
    par->add_option("--scan-k", scan_k, "|k| range of the window scan");
    par->add_option("--scan-m", scan_m, "max window length");
    par->add_option("--dump", dump_path, "dump j<TAB>class table");
    auto* perc = app.add_subcommand("percolation", "functional estimates");
    int replicates = 8;
    perc->add_option("--replicates", replicates, "clusters per grid point");
    auto* ver = app.add_subcommand("verify", "oracle battery");
    auto* fit = app.add_subcommand("fit", "stretched-exponent fit");
    std::string fit_in;
    fit->add_option("--in", fit_in, "JSON-lines input")->required();

    for (auto* sub : {rp, fol, cou, par, perc, ver, fit}) sub->fallthrough();
    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (rp->parsed()) return cmd_return_prob(o);
        if (fol->parsed()) return cmd_folner(o, window, k_max, mode);
        if (cou->parsed()) return cmd_coulhon(o, form, t_max);
        if (par->parsed()) return cmd_partition(o, scan_k, scan_m, dump_path);
        if (perc->parsed()) return cmd_percolation(o, replicates);
        if (ver->parsed()) return cmd_verify(o.seed);
        if (fit->parsed()) return cmd_fit(fit_in);
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = e.what();
        std::cerr << err.dump() << std::endl;
        return 2;
    }
    return 0;
}
