// n2nsdf: sample, train, reconstruct, eval and experiment subcommands.
//
// Settings are resolved in order: built-in defaults, --config file, --set
// key=value pairs, then dedicated flags. Later sources win.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "n2nsdf/commands.hpp"
#include "n2nsdf/config.hpp"
#include "n2nsdf/errors.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> settings;
    std::map<std::string, std::string> flags;
};

void add_common(CLI::App& app, CommonOptions& opts) {
    app.add_option("-c,--config", opts.config_path, "key = value config file");
    app.add_option("--set", opts.settings, "override a config key, as key=value")->take_all();
    // Dedicated flags for the keys people change most; each maps to the config key of the same name.
    for (const char* key : {"shape", "noise_law", "sigma", "mu", "mode", "seed", "epochs", "pairs_per_epoch",
                            "resolution", "iso_value", "output_dir", "metric_samples"}) {
        std::string flag = std::string("--") + key;
        for (auto& ch : flag)
            if (ch == '_') ch = '-';
        app.add_option_function<std::string>(
            flag, [&opts, k = std::string(key)](const std::string& v) { opts.flags[k] = v; },
            std::string("set ") + key);
    }
}

n2nsdf::ExperimentConfig resolve(const CommonOptions& opts) {
    n2nsdf::ExperimentConfig config =
        opts.config_path.empty() ? n2nsdf::ExperimentConfig{} : n2nsdf::load_config(opts.config_path);
    for (const auto& s : opts.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw n2nsdf::ConfigError(s, "--set expects key=value");
        n2nsdf::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : opts.flags) n2nsdf::apply_setting(config, k, v);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paired-noise neural signed distance fields"};
    app.require_subcommand(1);

    CommonOptions sample_opts, train_opts, recon_opts, eval_opts, exp_opts;
    std::string checkpoint, eval_input;

    auto* sample = app.add_subcommand("sample", "write the clean cloud and a noisy pair as XYZ");
    add_common(*sample, sample_opts);
    auto* train = app.add_subcommand("train", "train a field; writes a checkpoint and a JSONL record");
    add_common(*train, train_opts);
    auto* recon = app.add_subcommand("reconstruct", "extract an OBJ mesh from a checkpoint");
    add_common(*recon, recon_opts);
    recon->add_option("checkpoint", checkpoint, "checkpoint file")->required();
    auto* eval = app.add_subcommand("eval", "score a mesh or checkpoint against an analytic shape");
    add_common(*eval, eval_opts);
    eval->add_option("input", eval_input, "OBJ mesh or checkpoint")->required();
    auto* experiment = app.add_subcommand("experiment", "run a sweep and write a CSV table");
    add_common(*experiment, exp_opts);
    app.add_flag_callback("--list-keys", [] {
        for (const auto& k : n2nsdf::config_keys()) std::cout << k << "\n";
        std::exit(0);
    }, "print every config key and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : n2nsdf::kExitConfigOrIo;
    }

    return n2nsdf::run_guarded(
        [&]() -> n2nsdf::CommandOutcome {
            if (*sample) return n2nsdf::cmd_sample(resolve(sample_opts));
            if (*train) return n2nsdf::cmd_train(resolve(train_opts));
            if (*recon) return n2nsdf::cmd_reconstruct(resolve(recon_opts), checkpoint);
            if (*eval) return n2nsdf::cmd_eval(resolve(eval_opts), eval_input);
            return n2nsdf::cmd_experiment(resolve(exp_opts), &std::cerr);
        },
        std::cerr);
}
