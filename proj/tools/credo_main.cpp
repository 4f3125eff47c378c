// credo: credible autocoding of annotated controller models.
//
// Subcommands: autocode (emit annotated program + machine-vc), check
// (autocode then discharge the verification conditions), simulate
// (closed-loop trace with invariant monitors), lqr (print the linear design).
//
// Exit codes: 0 success, 1 verification/monitor/synthesis failure,
// 2 usage or input errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "credo/errors.hpp"
#include "credo/linalg.hpp"
#include "credo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace credo;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string model_path;
    std::string out_dir;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

fs::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("CREDO_OUT_DIR"); env && *env) return env;
    return ".";
}

std::string model_stem(const std::string& path) { return fs::path(path).stem().string(); }

// manifest line recorded verbatim in every report
std::string manifest_line(const std::string& subcommand, const CommonArgs& args,
                          const std::string& extra) {
    std::ostringstream os;
    os << "manifest version=" << kVersion << " subcommand=" << subcommand
       << " input=" << args.model_path << " outdir=" << resolve_out_dir(args.out_dir).string();
    if (!extra.empty()) os << " " << extra;
    return os.str();
}

Matrix parse_vector_flag(const std::string& text, std::size_t n, const std::string& what) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        vals.push_back(std::stod(item));
    }
    if (vals.size() != n) {
        throw Error(what + " needs " + std::to_string(n) + " comma-separated values");
    }
    return Matrix::column(vals);
}

int run_autocode_cmd(const CommonArgs& args) {
    const PipelineResult r = run_autocode_file(read_file(args.model_path));
    const fs::path dir = resolve_out_dir(args.out_dir);
    fs::create_directories(dir);
    const std::string stem = model_stem(args.model_path);
    const fs::path mfile = dir / (stem + ".annotated.m");
    const fs::path vcfile = dir / (stem + ".vc");
    write_file(mfile, r.matlab_text);
    write_file(vcfile, r.vc_text);

    std::cout << manifest_line("autocode", args, "") << "\n";
    std::cout << "model " << r.model.name << ": " << r.loops.size() << " loop(s)\n";
    for (std::size_t li = 0; li < r.loops.size(); ++li) {
        const Loop& loop = r.loops[li];
        std::cout << "  loop" << li + 1 << " [" << loop.subsystem
                  << "]: " << (loop.invariant_known ? to_string(loop.invariant)
                                                    : std::string("(no invariant)"))
                  << "\n";
    }
    for (const std::string& err : r.loop_errors) {
        std::cout << "  propagation error: " << err << "\n";
    }
    std::cout << "wrote " << mfile.string() << "\n";
    std::cout << "wrote " << vcfile.string() << "\n";
    return r.loop_errors.empty() ? 0 : 1;
}

int run_check_cmd(const CommonArgs& args, const CheckBudget& budget, double dt_override) {
    PipelineOptions opts;
    opts.budget = budget;
    opts.dt_override = dt_override;
    const PipelineResult r = run_autocode_file(read_file(args.model_path), opts);

    const fs::path dir = resolve_out_dir(args.out_dir);
    fs::create_directories(dir);
    const std::string stem = model_stem(args.model_path);
    write_file(dir / (stem + ".annotated.m"), r.matlab_text);
    write_file(dir / (stem + ".vc"), r.vc_text);

    // independent per-VC checks, deterministic per-VC seeds, joined in order
    std::vector<std::future<Verdict>> futures;
    for (std::size_t i = 0; i < r.vcs.size(); ++i) {
        CheckBudget vc_budget = budget;
        vc_budget.seed = budget.seed + 1000003 * i;
        futures.push_back(std::async(std::launch::async, [vc = r.vcs[i], vc_budget] {
            return check_vc(vc, vc_budget);
        }));
    }

    std::ostringstream report;
    std::ostringstream extra;
    extra << "samples=" << budget.samples << " depth=" << budget.depth
          << " seed=" << budget.seed << " dt=" << format_double(r.dt)
          << " outputs=" << stem << ".annotated.m," << stem << ".vc," << stem
          << ".check.report," << stem << ".check.json";
    report << "# credo check report\n" << manifest_line("check", args, extra.str()) << "\n";

    nlohmann::ordered_json summary;
    summary["version"] = kVersion;
    summary["model"] = r.model.name;
    summary["dt"] = r.dt;
    summary["vcs"] = nlohmann::ordered_json::array();

    std::size_t verified = 0, falsified = 0, unknown = 0;
    for (std::size_t i = 0; i < r.vcs.size(); ++i) {
        const VC& vc = r.vcs[i];
        const Verdict v = futures[i].get();
        report << "vc " << vc.id << " " << to_string(v.status)
               << " samples=" << v.stats.samples << " boxes=" << v.stats.boxes
               << " max_violation=" << format_double(v.stats.max_violation);
        if (!v.reason.empty()) report << " reason=\"" << v.reason << "\"";
        report << "\n";
        if (v.status == VerdictStatus::Falsified) {
            for (const auto& [name, value] : v.witness) {
                report << "witness " << vc.id << " " << name << " = "
                       << to_string(cst(value)) << "\n";
            }
        }
        nlohmann::ordered_json jvc;
        jvc["id"] = vc.id;
        jvc["status"] = to_string(v.status);
        jvc["samples"] = v.stats.samples;
        jvc["boxes"] = v.stats.boxes;
        if (!v.reason.empty()) jvc["reason"] = v.reason;
        summary["vcs"].push_back(jvc);
        verified += v.status == VerdictStatus::Verified;
        falsified += v.status == VerdictStatus::Falsified;
        unknown += v.status == VerdictStatus::Unknown;
        std::cout << vc.id << ": " << to_string(v.status) << "\n";
    }
    for (const std::string& err : r.loop_errors) {
        report << "loop_error " << err << "\n";
        std::cout << "loop error: " << err << "\n";
    }

    // variable bounds from the certified invariants, when the model is
    // car-shaped (sliding invariant + slip fact present)
    if (r.has_invariant && !r.facts.empty()) {
        try {
            const ExtractedBounds b = extract_bounds(Ellipsoid(r.invariant_p), r.eq.x_ss,
                                                     1.0, r.facts, r.params);
            const char* xn[] = {"V", "beta", "psidot"};
            for (std::size_t i = 0; i < b.x.size(); ++i) {
                report << "bound x." << xn[i] << " " << b.x[i].str() << "\n";
            }
            for (std::size_t i = 0; i < b.phi.size(); ++i) {
                report << "bound phi." << (i == 0 ? "F" : "R") << " " << b.phi[i].str()
                       << "\n";
            }
            for (std::size_t i = 0; i < b.omega.size(); ++i) {
                report << "bound omega." << (i == 0 ? "F" : "R") << " " << b.omega[i].str()
                       << "\n";
            }
        } catch (const Error&) {
            // no slip fact: bounds unavailable, not an error for check
        }
    }

    const bool ok = r.loop_errors.empty() && falsified == 0 && unknown == 0;
    report << "summary verified=" << verified << " falsified=" << falsified
           << " unknown=" << unknown << " loop_errors=" << r.loop_errors.size() << "\n";
    report << "result " << (ok ? "PASS" : "FAIL") << "\n";
    summary["verified"] = verified;
    summary["falsified"] = falsified;
    summary["unknown"] = unknown;
    summary["loop_errors"] = r.loop_errors;
    summary["result"] = ok ? "PASS" : "FAIL";

    write_file(dir / (stem + ".check.report"), report.str());
    write_file(dir / (stem + ".check.json"), summary.dump(2) + "\n");
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

int run_simulate_cmd(const CommonArgs& args, double dt_override, std::size_t steps,
                     const std::string& x0_flag, const std::string& z0_flag,
                     std::uint64_t seed) {
    PipelineOptions opts;
    opts.dt_override = dt_override;
    const PipelineResult r = run_autocode_file(read_file(args.model_path), opts);
    if (!r.has_linear_loop || !r.has_invariant) {
        throw Error("simulate needs a car-shaped model with a linear loop");
    }

    SimConfig cfg;
    cfg.dt = r.dt;
    cfg.steps = steps;
    cfg.seed = seed;

    Matrix x0 = r.eq.x_ss;
    if (!x0_flag.empty()) x0 = parse_vector_flag(x0_flag, 3, "--x0");
    Matrix z0(2, 1);
    if (!z0_flag.empty()) z0 = parse_vector_flag(z0_flag, 2, "--z0");

    const Matrix k_lqr = r.lqr.gain;
    const Matrix u0 = r.eq.u_ss - k_lqr * (x0 - r.eq.x_ss);
    cfg.initial.x = x0;
    cfg.initial.omega = phi(x0, u0, r.params) + z0;

    cfg.monitors.push_back({"xt_P_xt", pred_le(quad(r.invariant_p, var("xtilde"), "P"),
                                               cst(1.0))});
    cfg.monitors.push_back({"z_z", pred_le(dot(var("z"), var("z")), cst(1.0))});

    const Trace trace = run(cfg, r.params, k_lqr, r.eq);
    const MonitorReport mon = monitor_report(trace);

    const fs::path dir = resolve_out_dir(args.out_dir);
    fs::create_directories(dir);
    const std::string stem = model_stem(args.model_path);
    write_file(dir / (stem + ".trace.tsv"), trace_to_text(trace));

    std::ostringstream report;
    std::ostringstream extra;
    extra << "dt=" << format_double(cfg.dt) << " steps=" << steps << " seed=" << seed
          << " x0=" << to_string(cst(x0)) << " z0=" << to_string(cst(z0))
          << " outputs=" << stem << ".trace.tsv," << stem << ".monitor.report";
    report << "# credo simulate report\n" << manifest_line("simulate", args, extra.str())
           << "\n";
    bool ok = true;
    for (const MonitorResult& m : mon.monitors) {
        report << "monitor " << m.name << " max=" << format_double(m.max_value)
               << " first_violation=" << m.first_violation << "\n";
        std::cout << "monitor " << m.name << ": max " << format_double(m.max_value);
        if (m.first_violation >= 0) {
            std::cout << " VIOLATED at step " << m.first_violation;
            ok = false;
        }
        std::cout << "\n";
    }
    report << "result " << (ok ? "PASS" : "FAIL") << "\n";
    write_file(dir / (stem + ".monitor.report"), report.str());
    std::cout << "wrote " << (dir / (stem + ".trace.tsv")).string() << "\n";
    return ok ? 0 : 1;
}

int run_lqr_cmd(const CommonArgs& args) {
    const PipelineResult r = run_autocode_file(read_file(args.model_path));
    if (!r.has_linear_loop) {
        std::cerr << "error: model has no linear plant loop\n";
        return 1;
    }
    std::cout << manifest_line("lqr", args, "") << "\n";
    std::cout << "K (u = -K xtilde) = " << to_string(cst(r.lqr.gain)) << "\n";
    std::cout << "P (scaled invariant) = " << to_string(cst(r.invariant_p)) << "\n";
    std::cout << "closed-loop spectral radius = "
              << format_double(spectral_radius(r.a_disc - r.b_disc * r.lqr.gain)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"credible autocoding pipeline for annotated controller models"};
    app.require_subcommand(1);

    CommonArgs args;
    CheckBudget budget;
    double dt_override = 0.0;
    std::size_t steps = 1000;
    std::string x0_flag, z0_flag;
    std::uint64_t sim_seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("model", args.model_path, "model file")->required();
        sub->add_option("-o,--out", args.out_dir,
                        "output directory (default: CREDO_OUT_DIR or .)");
    };

    CLI::App* autocode = app.add_subcommand("autocode", "emit the annotated program");
    add_common(autocode);

    CLI::App* check = app.add_subcommand("check", "autocode and discharge the VCs");
    add_common(check);
    check->add_option("--samples", budget.samples, "sampling budget per VC");
    check->add_option("--depth", budget.depth, "interval bisection depth");
    check->add_option("--seed", budget.seed, "sampling seed");
    check->add_option("--dt", dt_override, "override the model's dt binding");

    CLI::App* simulate = app.add_subcommand("simulate", "closed-loop simulation");
    add_common(simulate);
    simulate->add_option("--dt", dt_override, "override the model's dt binding");
    simulate->add_option("--steps", steps, "number of Euler steps");
    simulate->add_option("--x0", x0_flag, "initial state V,beta,psidot");
    simulate->add_option("--z0", z0_flag, "initial manifold offset z1,z2");
    simulate->add_option("--seed", sim_seed, "seed recorded in the manifest");

    CLI::App* lqr = app.add_subcommand("lqr", "print the linear design");
    add_common(lqr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(autocode)) return run_autocode_cmd(args);
        if (app.got_subcommand(check)) return run_check_cmd(args, budget, dt_override);
        if (app.got_subcommand(simulate)) {
            return run_simulate_cmd(args, dt_override, steps, x0_flag, z0_flag, sim_seed);
        }
        if (app.got_subcommand(lqr)) return run_lqr_cmd(args);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InstabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SingularityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NonFiniteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SingularMatrixError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IntegrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
