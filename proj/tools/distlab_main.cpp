#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "distlab/harness.hpp"
#include "distlab/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAlgorithm = 3;
constexpr int kExitIo = 4;

int run_kind(const std::string& kind, const std::string& config_path,
             const std::string& seeds_arg, const std::string& out_arg, int threads,
             bool serial) {
    using namespace distlab;
    if (serial) par::set_global_mode(par::mode::serial);
    if (threads > 0) par::set_num_threads(threads);

    experiment_config cfg;
    try {
        json j = load_json_file(config_path);
        j["kind"] = kind;
        if (!seeds_arg.empty()) j["seeds"] = seeds_arg;
        if (!out_arg.empty()) j["out"] = out_arg;
        cfg = parse_config(j);
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }

    try {
        const int code = run_experiment_to_files(cfg);
        if (code == kExitAlgorithm)
            std::fprintf(stderr, "one or more seeds hit an algorithm failure (see run_meta.json)\n");
        return code;
    } catch (const algorithm_failure& e) {
        std::fprintf(stderr, "algorithm failure: %s\n", e.what());
        return kExitAlgorithm;
    } catch (const io_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distlab: distributional decision-making laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string seeds_arg;
    std::string out_arg;
    int threads = 0;
    bool serial = false;

    const std::vector<std::string> kinds = {"distcb", "squarecb", "fastcb", "odisco",
                                            "pdisco", "eluder",   "proptest"};
    std::string chosen;
    for (const auto& kind : kinds) {
        auto* sub = app.add_subcommand(kind);
        sub->add_option("--config", config_path, "experiment config JSON")->required();
        sub->add_option("--seeds", seeds_arg, "seed list, e.g. 0..9 or 0,4,7");
        sub->add_option("--out", out_arg, "output directory");
        sub->add_option("--threads", threads, "worker thread count");
        sub->add_flag("--serial", serial, "disable the OpenMP kernels");
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    CLI11_PARSE(app, argc, argv);
    return run_kind(chosen, config_path, seeds_arg, out_arg, threads, serial);
}
