#include "ris/errors.hpp"
#include "ris/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 2;
constexpr int kExitSolver = 3;
constexpr int kExitConfig = 4;

std::vector<double> parse_tau_list(const std::string& s)
{
    std::vector<double> taus;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) taus.push_back(std::stod(item));
    }
    if (taus.empty()) throw ris::BadConfig("empty step-size list");
    return taus;
}

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
};

GridSpec parse_grid(const std::string& s)
{
    GridSpec g;
    char c1 = 0, c2 = 0;
    std::stringstream ss(s);
    if (!(ss >> g.lo >> c1 >> g.hi >> c2 >> g.step) || c1 != ':' || c2 != ':' ||
        !(g.hi >= g.lo) || !(g.step > 0.0)) {
        throw ris::BadConfig("bad grid spec '" + s + "', expected LO:HI:STEP");
    }
    return g;
}

json load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ris::BadConfig("cannot open config file '" + path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw ris::BadConfig(std::string("config parse error: ") + e.what());
    }
    return cfg;
}

// CLI flags win over config fields of the same name.
template <typename T>
void merge(const CLI::Option* opt, const json& cfg, const std::string& key, T& value)
{
    if (opt != nullptr && opt->count() > 0) return;
    if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ris::BadConfig("cannot open output file '" + path + "'");
    return out;
}

struct CommonArgs {
    std::string config;
    std::string problem;
    std::string scheme = "local";
    std::string reference = "analytic";
    std::string out;
    std::string taus;
    std::string t_grid;
    std::string z_grid = "-1.5:1.5:0.001";
    std::string plot_out;
    double tau = 0.0;
    int mesh_n = 32;
};

std::shared_ptr<ris::Problem> build_problem(const CommonArgs& args)
{
    if (args.problem.empty()) throw ris::BadConfig("no problem selected");
    return ris::make_problem(args.problem, args.mesh_n);
}

ris::Scheme parse_scheme(const std::string& s)
{
    if (s == "local") return ris::Scheme::Local;
    if (s == "global") return ris::Scheme::Global;
    throw ris::BadConfig("unknown scheme '" + s + "'");
}

int cmd_run(const CommonArgs& args)
{
    auto p = build_problem(args);
    if (!(args.tau > 0.0)) throw ris::BadConfig("run needs --tau > 0");
    const bool global = parse_scheme(args.scheme) == ris::Scheme::Global;
    const ris::Trajectory traj =
        global ? ris::run_global(*p, args.tau) : ris::run_local(*p, args.tau);
    auto out = open_out(args.out);
    ris::write_trajectory_csv(traj, out);
    const auto check = ris::check_trajectory(*p, traj, global);
    if (check.total() > 0) {
        std::cerr << "invariant violations: " << check.total() << "\n";
        return kExitInvariant;
    }
    std::cout << "wrote " << traj.records.size() << " records to " << args.out << "\n";
    return kExitOk;
}

int cmd_converge(const CommonArgs& args)
{
    auto p = build_problem(args);
    const auto taus = parse_tau_list(args.taus);
    const ris::Reference ref = args.reference == "self"
                                   ? ris::self_reference(*p, taus.back() / 16.0)
                                   : ris::analytic_reference(*p);
    const auto report =
        ris::run_convergence_study(*p, parse_scheme(args.scheme), taus, ref);
    auto out = open_out(args.out);
    ris::write_report_csv(report, out);
    if (!args.plot_out.empty()) {
        auto plot = open_out(args.plot_out);
        ris::write_plot_csv(report, plot);
    }
    for (const auto& row : report.rows) {
        if (row.failed) {
            std::cerr << "tau " << row.tau << " failed: " << row.error << "\n";
            return kExitSolver;
        }
    }
    if (report.total_invariant_violations() > 0) {
        std::cerr << "invariant violations: " << report.total_invariant_violations() << "\n";
        return kExitInvariant;
    }
    std::cout << "wrote " << report.rows.size() << " rows to " << args.out << "\n";
    return kExitOk;
}

int cmd_compare(const CommonArgs& args)
{
    auto p = build_problem(args);
    if (!(args.tau > 0.0)) throw ris::BadConfig("compare needs --tau > 0");
    const ris::Reference ref = ris::combined_reference(*p, args.tau / 16.0);
    const auto cmp = ris::compare_schemes(*p, args.tau, ref);
    auto out = open_out(args.out);
    ris::write_comparison_csv(cmp, out);
    std::cout << "local vs ref " << cmp.local_vs_ref << ", global vs ref " << cmp.global_vs_ref
              << "\n";
    return kExitOk;
}

int cmd_stability(const CommonArgs& args)
{
    auto p = build_problem(args);
    const GridSpec tg = parse_grid(args.t_grid);
    const GridSpec zg = parse_grid(args.z_grid);
    std::vector<double> t_grid;
    for (double t = tg.lo; t <= tg.hi + tg.step * 1e-9; t += tg.step) t_grid.push_back(t);
    auto out = open_out(args.out);
    ris::write_stability_csv(*p, t_grid, zg.lo, zg.hi, zg.step, out);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rate-independent evolution solver"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string command;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "JSON config; flags override its fields");
        sub->add_option("--problem", args.problem, "counter1d|local1d|pde");
        sub->add_option("--mesh-n", args.mesh_n, "mesh subdivisions for the pde problem");
        sub->add_option("--out", args.out, "output CSV path");
        sub->callback([&, sub]() { command = sub->get_name(); });
        return sub;
    };

    auto* run = add_common(app.add_subcommand("run", "single trajectory"));
    run->add_option("--tau", args.tau, "step size");
    run->add_option("--scheme", args.scheme, "local|global");

    auto* converge = add_common(app.add_subcommand("converge", "convergence study"));
    converge->add_option("--taus", args.taus, "comma-separated step sizes, decreasing");
    converge->add_option("--reference", args.reference, "analytic|self");
    converge->add_option("--scheme", args.scheme, "local|global");
    converge->add_option("--plot-out", args.plot_out, "tau,error,slope1 guide CSV");

    auto* compare = add_common(app.add_subcommand("compare", "local vs global schemes"));
    compare->add_option("--tau", args.tau, "step size");

    auto* stability = add_common(app.add_subcommand("stability", "stability-set scan"));
    stability->add_option("--t-grid", args.t_grid, "time grid LO:HI:STEP");
    stability->add_option("--z-grid", args.z_grid, "state grid LO:HI:STEP");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (!args.config.empty()) {
            const json cfg = load_config(args.config);
            CLI::App* sub = app.get_subcommands().front();
            auto find = [&sub](const std::string& name) -> const CLI::Option* {
                return sub->get_option_no_throw(name);
            };
            merge(find("--problem"), cfg, "problem", args.problem);
            merge(find("--mesh-n"), cfg, "mesh_n", args.mesh_n);
            merge(find("--out"), cfg, "out", args.out);
            merge(find("--tau"), cfg, "tau", args.tau);
            merge(find("--scheme"), cfg, "scheme", args.scheme);
            merge(find("--reference"), cfg, "reference", args.reference);
            merge(find("--t-grid"), cfg, "t_grid", args.t_grid);
            merge(find("--z-grid"), cfg, "z_grid", args.z_grid);
            merge(find("--plot-out"), cfg, "plot_out", args.plot_out);
            if (converge->parsed() && converge->get_option("--taus")->count() == 0 &&
                cfg.contains("taus")) {
                std::string joined;
                for (const auto& v : cfg.at("taus")) {
                    if (!joined.empty()) joined += ',';
                    joined += ris::fmt17(v.get<double>());
                }
                args.taus = joined;
            }
        }
        if (args.out.empty()) throw ris::BadConfig("no output path given");

        if (run->parsed()) return cmd_run(args);
        if (converge->parsed()) return cmd_converge(args);
        if (compare->parsed()) return cmd_compare(args);
        if (stability->parsed()) return cmd_stability(args);
        throw ris::BadConfig("no subcommand");
    } catch (const ris::BadConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ris::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
}
