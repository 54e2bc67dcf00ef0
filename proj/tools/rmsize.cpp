#include "rmplate/csv.hpp"
#include "rmplate/error.hpp"
#include "rmplate/estimates.hpp"
#include "rmplate/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace rmplate;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kInequality = 3 };

struct Globals {
    std::string config;
    std::string out;
    int jobs = 1;
    double tol = 0.0; // 0 keeps the config value
    bool dense = false;
    bool full = false;
    bool timestamp = false;
};

// Report sink: a file under the output directory, or stdout.
class Sink {
public:
    Sink(const Globals &g, const std::string &name, const std::string &kind) {
        std::string dir = g.out;
        if (dir.empty())
            if (const char *env = std::getenv("RMPLATE_OUT"))
                dir = env;
        if (!dir.empty()) {
            fs::create_directories(dir);
            path_ = (fs::path(dir) / name).string();
            file_ = std::make_unique<std::ofstream>(path_);
            if (!*file_)
                throw InvalidInput("cannot write " + path_);
        }
        write_schema_line(stream(), kind);
        if (g.timestamp) {
            const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            stream() << "# generated " << buf << '\n';
        }
    }
    ~Sink() {
        if (file_)
            std::cerr << "wrote " << path_ << '\n';
    }
    std::ostream &stream() { return file_ ? *file_ : std::cout; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

class Rows {
public:
    Rows(std::ostream &out, std::string id) : out_(out), id_(std::move(id)) { out_ << "id,quantity,value\n"; }
    void add(const std::string &q, double v) { out_ << id_ << ',' << q << ',' << format_number(v) << '\n'; }
    void add(const std::string &q, const std::string &v) { out_ << id_ << ',' << q << ',' << v << '\n'; }

private:
    std::ostream &out_;
    std::string id_;
};

ExperimentConfig load_config(const Globals &g) {
    if (g.config.empty())
        throw InvalidInput("--config is required");
    ExperimentConfig c = read_config(g.config);
    if (g.tol > 0.0)
        c.tol = g.tol;
    if (g.full)
        c.shear = ShearMode::full_integration;
    if (g.dense)
        c.dense_oracle = true;
    c.jobs = std::max(c.jobs, g.jobs);
    return c;
}

RunOptions run_options(const ExperimentConfig &c) {
    RunOptions o;
    o.dense_oracle = c.dense_oracle;
    o.shear = c.shear;
    o.jobs = c.jobs;
    return o;
}

struct Solved {
    Problem problem;
    PlateState state;
};

// Solves the configured problem, with the inclusion when one is given.
Solved solve_problem(const ExperimentConfig &c) {
    Solved s{build_problem(c), {}};
    for (const auto &w : s.problem.warnings)
        std::cerr << "warning: " << w << '\n';
    const bool inc = s.problem.has_inclusion();
    LinearSystem K = assemble_stiffness(s.problem.mesh, s.problem.tensors, inc ? &s.problem.inclusion.mask : nullptr,
                                        inc ? &s.problem.inclusion_material : nullptr, {c.shear, c.jobs});
    K.rhs = assemble_load(s.problem.mesh, s.problem.load, c.tol).rhs;
    s.state = solve_system(K, c.dense_oracle, c.tol);
    return s;
}

int cmd_solve(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const Solved s = solve_problem(c);
    std::ostringstream body;
    write_state_csv(body, s.problem.mesh, s.state);
    const std::string text = body.str();
    Sink sink(g, c.id + "_state.csv", "plate-state");
    sink.stream() << text.substr(text.find('\n') + 1); // schema line comes from the sink
    std::cerr << "dofs " << s.state.dofs.size() << ", relative residual " << s.state.residual << '\n';
    return kOk;
}

void lemma_rows(Rows &rows, const EnergyLemmaReport &l) {
    rows.add("regime", to_string(l.regime));
    rows.add("lhs", l.lhs);
    rows.add("mid", l.mid);
    rows.add("rhs", l.rhs);
    rows.add("mid_boundary", l.mid_boundary);
    rows.add("mid_work", l.mid_work);
    rows.add("lower_slack", l.lower_slack());
    rows.add("upper_slack", l.upper_slack());
    rows.add("lower_pass", l.lower_pass ? 1.0 : 0.0);
    rows.add("upper_pass", l.upper_pass ? 1.0 : 0.0);
    rows.add("cross_check_pass", l.cross_check_pass ? 1.0 : 0.0);
    rows.add("sign_consistent", l.sign_consistent ? 1.0 : 0.0);
    rows.add("pass", l.pass() ? 1.0 : 0.0);
}

int cmd_work(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const SizeEstimateReport r = run_size_experiment(c, run_options(c));
    Sink sink(g, c.id + "_work.csv", "work-report");
    Rows rows(sink.stream(), c.id);
    rows.add("W0", r.W0);
    rows.add("W", r.W);
    rows.add("gap", r.gap);
    rows.add("relative_gap", r.relative_gap);
    rows.add("F", r.F);
    rows.add("stability_ratio", r.stability);
    return kOk;
}

int cmd_energy_lemma(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const SizeEstimateReport r = run_size_experiment(c, run_options(c));
    Sink sink(g, c.id + "_energy_lemma.csv", "energy-lemma");
    Rows rows(sink.stream(), c.id);
    rows.add("inclusion", r.jumps ? 1.0 : 0.0);
    if (r.jumps) {
        rows.add("eta", r.jumps->eta);
        rows.add("delta", r.jumps->delta);
    }
    lemma_rows(rows, r.lemma);
    if (!r.lemma.pass()) {
        std::cerr << "energy lemma chain violated\n";
        return kInequality;
    }
    return kOk;
}

void size_header(std::ostream &out) { out << "id,|D|,W0,W,gap,lower,upper,fatness,F,lemma_pass\n"; }

void size_row(std::ostream &out, const SizeEstimateReport &r) {
    out << r.id << ',' << format_number(r.area) << ',' << format_number(r.W0) << ',' << format_number(r.W) << ','
        << format_number(r.gap) << ',' << format_number(r.bounds.lower) << ',' << format_number(r.bounds.upper) << ','
        << format_number(r.fatness) << ',' << format_number(r.F) << ',' << (r.lemma.pass() ? 1 : 0) << '\n';
}

int cmd_size(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const SizeEstimateReport r = run_size_experiment(c, run_options(c));
    for (const auto &w : r.warnings)
        std::cerr << "warning: " << w << '\n';
    {
        Sink sink(g, c.id + "_size.csv", "size-estimate");
        size_header(sink.stream());
        size_row(sink.stream(), r);
    }
    if (r.jumps && !r.fat)
        std::cerr << "note: fatness ratio " << r.fatness << " < 1/2\n";
    if (!r.sign_ok || !r.lemma.pass()) {
        std::cerr << "sign law or energy lemma violated\n";
        return kInequality;
    }
    return kOk;
}

int cmd_three_spheres(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const Solved s = solve_problem(c);
    const double rho0 = s.problem.domain.apriori.rho0;
    const EnergyField field = strain_energy_density(s.problem.mesh, s.state.dofs, rho0, {c.shear, c.subdivisions});
    ThreeSpheresOptions opt;
    opt.theta = c.theta;
    Sink sink(g, c.id + "_three_spheres.csv", "three-spheres");
    Rows rows(sink.stream(), c.id);
    bool ok = true;
    for (double rho : c.rho) {
        const std::string tag = "rho=" + format_number(rho) + ":";
        if (c.center) {
            const ThreeSpheresReport r = three_spheres_check(field, s.problem.mesh, *c.center, rho, rho0, opt);
            rows.add(tag + "I_rho", r.I_rho);
            rows.add(tag + "I_3rho", r.I_3rho);
            rows.add(tag + "I_outer", r.I_outer);
            rows.add(tag + "tau", r.tau);
            rows.add(tag + "C", r.C);
            rows.add(tag + "pass", r.pass() ? 1.0 : 0.0);
            ok = ok && r.monotone && r.feasible;
            continue;
        }
        const ThreeSpheresScan scan = three_spheres_scan(field, s.problem.mesh, rho, rho0, 0.5 * rho, opt, c.jobs);
        double tau_min = 1.0;
        double tau_max = 0.0;
        double C_max = 0.0;
        for (const auto &r : scan.reports) {
            ok = ok && r.monotone && r.feasible;
            if (r.tau_defined) {
                tau_min = std::min(tau_min, r.tau);
                tau_max = std::max(tau_max, r.tau);
                C_max = std::max(C_max, r.C);
            }
        }
        rows.add(tag + "centers", static_cast<double>(scan.reports.size()));
        rows.add(tag + "pass_fraction", scan.pass_fraction);
        rows.add(tag + "tau_min", tau_min);
        rows.add(tag + "tau_max", tau_max);
        rows.add(tag + "C_max", C_max);
    }
    if (!ok) {
        std::cerr << "three-spheres monotonicity or feasibility violated\n";
        return kInequality;
    }
    return kOk;
}

int cmd_lps(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const Solved s = solve_problem(c);
    const double rho0 = s.problem.domain.apriori.rho0;
    const EnergyField field = strain_energy_density(s.problem.mesh, s.state.dofs, rho0, {c.shear, c.subdivisions});
    Sink sink(g, c.id + "_lps.csv", "lps");
    Rows rows(sink.stream(), c.id);
    bool ok = true;
    for (double rho : c.rho) {
        LpsOptions opt;
        opt.theta = c.theta;
        opt.jobs = c.jobs;
        opt.pitch = c.lps_pitch;
        if (!opt.pitch)
            opt.pitch = covering_square_side(c.theta, s.problem.domain.apriori.h1, rho0);
        const LpsReport r = lps_check(field, s.problem.mesh, rho, opt);
        const std::string tag = "rho=" + format_number(rho) + ":";
        rows.add(tag + "centers", static_cast<double>(r.centers.size()));
        rows.add(tag + "pitch", r.pitch);
        rows.add(tag + "C_rho", r.min_ratio);
        rows.add(tag + "max_ratio", r.max_ratio);
        rows.add(tag + "degenerate", r.degenerate ? 1.0 : 0.0);
        ok = ok && !r.degenerate && r.min_ratio > 0.0 && r.max_ratio <= 1.0;
    }
    if (!ok) {
        std::cerr << "LPS ratio outside (0, 1]\n";
        return kInequality;
    }
    return kOk;
}

int cmd_convergence(const Globals &g) {
    const ExperimentConfig c = load_config(g);
    const ConvergenceStudy st = pure_bending_convergence(c, run_options(c));
    {
        Sink sink(g, c.id + "_convergence.csv", "convergence");
        std::ostream &out = sink.stream();
        out << "level,mesh_size,elements,dofs,W,W_exact,energy_sq,energy,assumed_energy,l2,order_energy_sq,"
               "order_energy,order_l2\n";
        for (std::size_t i = 0; i < st.levels.size(); ++i) {
            const ConvergenceLevel &l = st.levels[i];
            out << i << ',' << format_number(l.mesh_size) << ',' << l.elements << ',' << l.dofs << ','
                << format_number(l.W) << ',' << format_number(st.W_exact) << ',' << format_number(l.error.energy_sq)
                << ',' << format_number(l.error.energy) << ',' << format_number(l.error.assumed_energy) << ','
                << format_number(l.error.l2) << ',' << format_number(l.order_energy_sq) << ','
                << format_number(l.order_energy) << ',' << format_number(l.order_l2) << '\n';
        }
    }
    if (!(st.levels.back().order_energy_sq >= 1.9)) {
        std::cerr << "observed order " << st.levels.back().order_energy_sq << " below 1.9\n";
        return kInequality;
    }
    return kOk;
}

int cmd_calibrate(const Globals &g) {
    if (g.config.empty() || !fs::is_directory(g.config))
        throw InvalidInput("calibrate needs --config <directory of .conf files>");
    std::vector<std::string> paths;
    for (const auto &entry : fs::directory_iterator(g.config))
        if (entry.is_regular_file() && (entry.path().extension() == ".cfg" || entry.path().extension() == ".conf"))
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw InvalidInput("no config files in " + g.config);

    std::vector<ExperimentConfig> configs;
    for (const auto &p : paths) {
        Globals one = g;
        one.config = p;
        configs.push_back(load_config(one));
    }
    std::vector<SizeEstimateReport> reports(configs.size());
    parallel_for(configs.size(), g.jobs, [&](std::size_t i) {
        RunOptions o = run_options(configs[i]);
        o.jobs = 1;
        reports[i] = run_size_experiment(configs[i], o);
    });
    std::vector<CorpusPoint> corpus;
    bool ok = true;
    for (const auto &r : reports) {
        ok = ok && r.sign_ok && r.lemma.pass();
        if (r.jumps)
            corpus.push_back(r.corpus_point());
    }
    const Calibration cal = calibrate_constants(corpus);
    for (auto &r : reports) {
        r.C1 = cal.C1;
        r.C2 = cal.C2;
        if (r.jumps && r.sign_ok) {
            r.bounds = size_bounds(r.gap, r.W0, *r.jumps, cal.C1, cal.C2, r.rho0);
            ok = ok && r.bounds.lower <= r.area * (1.0 + 1e-12) && r.area <= r.bounds.upper * (1.0 + 1e-12);
        }
    }
    {
        Sink sink(g, "calibration.csv", "calibration");
        size_header(sink.stream());
        for (const auto &r : reports)
            size_row(sink.stream(), r);
    }
    std::cerr << "C1 " << format_number(cal.C1) << ", C2 " << format_number(cal.C2) << ", C2/C1 "
              << format_number(cal.spread()) << '\n';
    if (!ok) {
        std::cerr << "calibrated bounds do not bracket the corpus, or a sign law / energy lemma check failed\n";
        return kInequality;
    }
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Reissner-Mindlin plate size-estimate lab"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "config file (calibrate: directory of .conf files)");
    app.add_option("--out", g.out, "output directory (default $RMPLATE_OUT, else stdout)");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--tol", g.tol, "load compatibility tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--dense-oracle", g.dense, "solve with the dense eigendecomposition oracle");
    app.add_flag("--full-integration", g.full, "disable the assumed shear strain");
    app.add_flag("--timestamp", g.timestamp, "add a generation timestamp comment to CSV output");

    struct Command {
        const char *name;
        const char *help;
        int (*run)(const Globals &);
    };
    const Command commands[] = {
        {"solve", "solve and write the plate state", cmd_solve},
        {"work", "boundary works W0, W and the gap", cmd_work},
        {"energy-lemma", "check the energy lemma chain", cmd_energy_lemma},
        {"size", "size estimate bounds for one experiment", cmd_size},
        {"three-spheres", "three spheres inequality fit", cmd_three_spheres},
        {"lps", "Lipschitz propagation of smallness ratios", cmd_lps},
        {"convergence", "pure bending refinement study", cmd_convergence},
        {"calibrate", "envelope-calibrate C1, C2 over a corpus directory", cmd_calibrate},
    };
    int (*selected)(const Globals &) = nullptr;
    for (const Command &c : commands)
        app.add_subcommand(c.name, c.help)->fallthrough()->callback([&selected, run = c.run] { selected = run; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    try {
        return selected(g);
    } catch (const InvalidInput &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const InequalityViolation &e) {
        std::cerr << "inequality check failed: " << e.what() << '\n';
        return kInequality;
    } catch (const NumericalFailure &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}
