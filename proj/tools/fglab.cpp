#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <fglab/experiment.hpp>

namespace {

// Exit codes: 0 success, 1 validation error, 2 solver non-convergence,
// 3 property-check failure.
constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNonConvergence = 2;
constexpr int kPropertyFail = 3;

int dispatch(const CLI::App& app, const CLI::App* sub, const fglab::ExperimentConfig& ec,
             const std::string& out_dir, bool with_oracle) {
    const std::string name = sub->get_name();
    if (name == "solve") {
        const fglab::SolveArtifacts art = fglab::run_solve(ec, out_dir);
        std::cout << "problem: " << ec.problem_name << "\n"
                  << "dim: " << ec.solver.dim << "  dt: " << fglab::format_value(ec.solver.dt)
                  << "  alpha: " << fglab::format_value(ec.solver.alpha) << "\n"
                  << "pieces: " << art.trajectory.pieces.size()
                  << "  certified: " << (art.trajectory.certified ? "yes" : "no") << "\n"
                  << "mild defect: " << fglab::format_value(art.defect) << "\n";
        for (const std::string& w : art.trajectory.warnings) std::cout << "warning: " << w << "\n";
        for (const std::string& f : art.files) std::cout << "wrote " << out_dir << "/" << f << "\n";
        return kOk;
    }
    if (name == "converge") {
        const fglab::ConvergenceArtifacts art = fglab::run_convergence(ec, out_dir);
        std::cout << fglab::convergence_summary(art.report);
        for (const std::string& w : art.warnings) std::cout << "warning: " << w << "\n";
        for (const std::string& f : art.files) std::cout << "wrote " << out_dir << "/" << f << "\n";
        return art.gates_pass ? kOk : kPropertyFail;
    }
    if (name == "verify") {
        const fglab::VerifyReport vr = fglab::run_verify(ec, with_oracle, out_dir);
        std::cout << fglab::verify_lines(vr);
        if (!out_dir.empty()) std::cout << "wrote " << out_dir << "/verify.csv\n";
        return vr.all_pass ? kOk : kPropertyFail;
    }
    const fglab::OracleComparison cmp = fglab::run_oracle_compare(ec, out_dir);
    for (std::size_t i = 0; i < cmp.times.size(); ++i)
        std::cout << "t = " << fglab::format_value(cmp.times[i])
                  << "  l2 distance = " << fglab::format_value(cmp.distances[i]) << "\n";
    std::cout << "horizon distance " << fglab::format_value(cmp.final_distance) << " vs tolerance "
              << fglab::format_value(cmp.tolerance) << ": " << (cmp.pass ? "PASS" : "FAIL") << "\n";
    for (const std::string& f : cmp.files) std::cout << "wrote " << out_dir << "/" << f << "\n";
    (void)app;
    return cmp.pass ? kOk : kPropertyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver and convergence laboratory for the delayed heat equation "
                 "with non-instantaneous impulses"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "fglab-out";
    std::string dims_text;
    double dt = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    bool with_oracle = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment configuration file; defaults built in");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--dims", dims_text, "tested dimensions, comma or space separated");
        sub->add_option("--dt", dt, "solver time step");
        sub->add_option("--alpha", alpha, "graded-norm exponent in (0, 1)");
        sub->add_option("--seed", seed, "seed for the randomized property checks");
    };
    CLI::App* c_solve =
        app.add_subcommand("solve", "solve at the configured dimension and export the trajectory");
    CLI::App* c_converge = app.add_subcommand(
        "converge", "solve across the tested dimensions plus a reference and write the diagnostics");
    CLI::App* c_verify =
        app.add_subcommand("verify", "run the property checks and assumption gates");
    CLI::App* c_oracle = app.add_subcommand(
        "oracle-compare", "diff the spectral solve against the finite-difference oracle");
    for (CLI::App* sub : {c_solve, c_converge, c_verify, c_oracle}) add_common(sub);
    c_verify->add_flag("--oracle", with_oracle, "include the finite-difference cross-check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    const CLI::App* sub = app.get_subcommands().front();
    try {
        fglab::ConfigOverrides ov;
        if (sub->count("--dims")) ov.dims = fglab::parse_size_list(dims_text, "--dims");
        if (sub->count("--dt")) ov.dt = dt;
        if (sub->count("--alpha")) ov.alpha = alpha;
        if (sub->count("--seed")) ov.seed = seed;
        ov.size_for_convergence = (sub == c_converge);

        const fglab::IniDoc doc = config_path.empty()
                                      ? fglab::IniDoc::parse_text(fglab::default_config_text())
                                      : fglab::IniDoc::parse_file(config_path);
        const fglab::ExperimentConfig ec = fglab::load_experiment(doc, ov);
        return dispatch(app, sub, ec, out_dir, with_oracle);
    } catch (const fglab::PicardError& e) {
        std::cerr << "solver non-convergence: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const fglab::OracleInstability& e) {
        std::cerr << "oracle non-convergence: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const fglab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
}
