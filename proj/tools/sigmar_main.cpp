// Batch front end: `run <config.json>` executes one experiment and writes
// report.csv / report.json / manifest.json (plus paths.jsonl on request)
// into the configured output directory; `list` prints the catalog.
//
// Exit codes: 0 all asserted checks pass, 1 config or usage error, 2 at
// least one asserted check failed, 3 a non-finite value surfaced in a path.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sigmar/experiments.hpp"
#include "sigmar/parallel.hpp"
#include "sigmar/path_types.hpp"
#include "sigmar/report_io.hpp"

namespace fs = std::filesystem;

namespace {

int run_from(const std::string& config_path, const bool have_seed, const std::uint64_t seed,
             const bool have_threads, const unsigned threads, const bool dump,
             const bool have_out, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "config: cannot open '" << config_path << "'\n";
        return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    sigmar::ExperimentConfig cfg = sigmar::parse_config(buf.str());
    if (have_seed) cfg.seed = seed;
    if (have_threads) cfg.threads = threads;
    if (dump) cfg.dump_paths = true;
    if (have_out) cfg.out_dir = out_dir;
    sigmar::validate_config(cfg);

    sigmar::set_worker_threads(cfg.threads);
    const sigmar::ExperimentResult res = sigmar::run_experiment(cfg);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const auto open_out = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw sigmar::ConfigError(std::string("config: cannot write to '") +
                                            (dir / name).string() + "'");
        return out;
    };
    {
        std::ofstream out = open_out("report.csv");
        sigmar::write_report_csv(out, cfg.experiment, res.reports);
    }
    {
        std::ofstream out = open_out("report.json");
        sigmar::write_report_json(out, cfg.experiment, res.reports);
    }
    {
        std::ofstream out = open_out("manifest.json");
        sigmar::write_manifest_json(out, cfg);
    }
    if (cfg.dump_paths) {
        std::ofstream out = open_out("paths.jsonl");
        sigmar::write_paths_jsonl(out, cfg.experiment, res.dumped);
    }
    return sigmar::all_asserted_pass(res.reports) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and statistical verification of flipped-excursion processes"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool dump = false;
    std::string out_dir;

    CLI::App* run = app.add_subcommand("run", "run one experiment from a JSON config");
    run->add_option("config", config_path, "path to the experiment config (flat JSON)")
        ->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the config's seed");
    CLI::Option* threads_opt =
        run->add_option("--threads", threads, "worker threads; never changes the numbers");
    run->add_flag("--dump-paths", dump, "also write paths.jsonl with sample paths");
    CLI::Option* out_opt =
        run->add_option("--out", out_dir, "output directory, overrides the config's out_dir");

    CLI::App* list = app.add_subcommand("list", "print every experiment id with a summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }

    if (list->parsed()) {
        for (const sigmar::ExperimentDef& def : sigmar::experiment_registry())
            std::cout << def.id << "  " << def.blurb << '\n';
        return 0;
    }

    try {
        return run_from(config_path, seed_opt->count() > 0, seed, threads_opt->count() > 0,
                        threads, dump, out_opt->count() > 0, out_dir);
    } catch (const sigmar::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const sigmar::NonFiniteError& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
