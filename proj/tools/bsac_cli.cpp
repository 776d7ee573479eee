// Command-line surface for the bagging supervised autoencoder classifier:
// prepare | train | predict | cv | sweep. Flat key=value config files,
// command-line flags win. Exit codes: 0 success, 1 internal error, 2 usage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsac/bsac.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string dataset = "generic";  // taiwan | lendingclub | generic
    std::string input;
    std::string out = "bsac_out";
    std::string label_column = "label";
    std::string model_path;  // predict only
    std::uint64_t seed = 42;
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    std::vector<double> gamma_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t folds = 5;
    std::vector<std::size_t> arch;  // empty -> per-dataset default
    bool fast = false;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::vector<double> parse_gamma_grid(const std::string& text) {
    std::vector<double> grid;
    for (const std::string& item : split_list(text)) {
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("invalid gamma value '" + item + "' in --gamma-grid");
        }
        if (grid.back() < 0.0 || grid.back() > 1.0) {
            throw UsageError("gamma " + item + " outside [0,1]");
        }
    }
    if (grid.empty()) throw UsageError("--gamma-grid is empty");
    return grid;
}

std::vector<std::size_t> parse_arch(const std::string& text) {
    std::vector<std::size_t> sizes;
    for (const std::string& item : split_list(text)) {
        try {
            const long v = std::stol(item);
            if (v < 1) throw UsageError("layer width " + item + " must be >= 1");
            sizes.push_back(static_cast<std::size_t>(v));
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError("invalid layer width '" + item + "' in --arch");
        }
    }
    return sizes;
}

/// Flat key=value file; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + " has no '='");
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return values;
}

/// Registers the shared flag set on one subcommand and resolves the layered
/// configuration (defaults < config file < flags).
struct OptionSet {
    CLI::App* cmd = nullptr;
    std::string config_path, dataset, input, out, label_column, model_path;
    std::string gamma_grid_text, arch_text;
    std::uint64_t seed = 0;
    long epochs = 0, batch_size = 0, folds = 0;
    double learning_rate = 0;
    bool fast = false;
    bool has_model_flag = false;

    void attach(CLI::App* sub, bool with_model_flag) {
        has_model_flag = with_model_flag;
        cmd = sub;
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--dataset", dataset, "taiwan | lendingclub | generic");
        sub->add_option("--input", input, "input CSV path");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--label-column", label_column, "label column for generic CSVs");
        sub->add_option("--seed", seed, "deterministic seed");
        sub->add_option("--epochs", epochs, "training epochs per candidate");
        sub->add_option("--batch-size", batch_size, "mini-batch size");
        sub->add_option("--learning-rate", learning_rate, "optimizer learning rate");
        sub->add_option("--gamma-grid", gamma_grid_text, "comma-separated gamma search grid");
        sub->add_option("--folds", folds, "cross-validation fold count");
        sub->add_option("--arch", arch_text, "comma-separated layer sizes (palindromic)");
        sub->add_flag("--fast", fast, "fast profile: 50 epochs, gamma grid {0.1,0.5,0.9}");
        if (with_model_flag) {
            sub->add_option("--model", model_path, "model archive path");
        }
    }

    RunConfig resolve() const {
        RunConfig config;
        std::map<std::string, std::string> file;
        if (cmd->count("--config")) file = read_config_file(config_path);

        auto file_or = [&](const char* key, auto parse, auto& target) {
            const auto it = file.find(key);
            if (it != file.end()) target = parse(it->second);
        };
        auto to_string_id = [](const std::string& s) { return s; };
        auto to_u64 = [](const std::string& s) { return std::stoull(s); };
        auto to_size = [](const std::string& s) { return static_cast<std::size_t>(std::stoul(s)); };
        auto to_double = [](const std::string& s) { return std::stod(s); };
        auto to_bool = [](const std::string& s) { return s == "1" || s == "true"; };

        try {
            file_or("dataset", to_string_id, config.dataset);
            file_or("input", to_string_id, config.input);
            file_or("out", to_string_id, config.out);
            file_or("label_column", to_string_id, config.label_column);
            file_or("model", to_string_id, config.model_path);
            file_or("seed", to_u64, config.seed);
            file_or("epochs", to_size, config.epochs);
            file_or("batch_size", to_size, config.batch_size);
            file_or("learning_rate", to_double, config.learning_rate);
            file_or("gamma_grid", parse_gamma_grid, config.gamma_grid);
            file_or("folds", to_size, config.folds);
            file_or("arch", parse_arch, config.arch);
            file_or("fast", to_bool, config.fast);
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw UsageError(std::string("bad config file value: ") + e.what());
        }

        if (cmd->count("--fast")) config.fast = fast;
        if (config.fast) {
            config.epochs = 50;
            config.gamma_grid = {0.1, 0.5, 0.9};
        }
        if (cmd->count("--dataset")) config.dataset = dataset;
        if (cmd->count("--input")) config.input = input;
        if (cmd->count("--out")) config.out = out;
        if (cmd->count("--label-column")) config.label_column = label_column;
        if (has_model_flag && cmd->count("--model")) config.model_path = model_path;
        if (cmd->count("--seed")) config.seed = seed;
        if (cmd->count("--epochs")) config.epochs = static_cast<std::size_t>(epochs);
        if (cmd->count("--batch-size")) config.batch_size = static_cast<std::size_t>(batch_size);
        if (cmd->count("--learning-rate")) config.learning_rate = learning_rate;
        if (cmd->count("--gamma-grid")) config.gamma_grid = parse_gamma_grid(gamma_grid_text);
        if (cmd->count("--folds")) config.folds = static_cast<std::size_t>(folds);
        if (cmd->count("--arch")) config.arch = parse_arch(arch_text);

        if (config.dataset != "taiwan" && config.dataset != "lendingclub" &&
            config.dataset != "generic") {
            throw UsageError("unknown dataset kind '" + config.dataset + "'");
        }
        if (config.epochs < 1) throw UsageError("--epochs must be >= 1");
        if (config.batch_size < 1) throw UsageError("--batch-size must be >= 1");
        if (config.learning_rate <= 0.0) throw UsageError("--learning-rate must be positive");
        if (config.folds < 3) throw UsageError("--folds must be >= 3");
        return config;
    }
};

bsac::PreparedDataset load_prepared(const RunConfig& config) {
    if (config.input.empty()) throw UsageError("--input is required");
    if (!fs::exists(config.input)) {
        throw UsageError("input file '" + config.input + "' does not exist");
    }
    if (config.dataset == "taiwan") {
        return bsac::prepare_taiwan(bsac::load_csv(config.input));
    }
    if (config.dataset == "lendingclub") {
        bsac::LoadOptions options;
        options.keep_columns = bsac::lending_club_required_columns();
        options.row_filter = bsac::lending_club_row_filter;
        return bsac::prepare_lending_club(bsac::load_csv(config.input, options));
    }
    return bsac::prepare_generic(bsac::load_csv(config.input), config.label_column);
}

std::vector<std::size_t> default_arch(const std::string& dataset, std::size_t features) {
    if (dataset == "taiwan") return {32, 16, 8, 5, 8, 16, 32};
    if (dataset == "lendingclub") return {features, 60, 30, 15, 30, 60, features};
    auto at_least = [](std::size_t v, std::size_t floor_v) { return std::max(v, floor_v); };
    const std::size_t h1 = at_least(features / 2, 2);
    const std::size_t h2 = at_least(features / 4, 2);
    const std::size_t h3 = at_least(features / 8, 1);
    return {features, h1, h2, h3, h2, h1, features};
}

bsac::SAConfig base_sa_config(const RunConfig& config, std::size_t features) {
    bsac::SAConfig sa;
    sa.layer_sizes = config.arch.empty() ? default_arch(config.dataset, features) : config.arch;
    if (sa.layer_sizes.front() != features) {
        throw UsageError("architecture front layer " + std::to_string(sa.layer_sizes.front()) +
                         " does not match the prepared feature count " +
                         std::to_string(features));
    }
    sa.epochs = config.epochs;
    sa.batch_size = config.batch_size;
    sa.learning_rate = config.learning_rate;
    sa.gamma = config.gamma_grid.front();
    try {
        sa.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return sa;
}

fs::path ensure_out_dir(const RunConfig& config) {
    const fs::path dir(config.out);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json config_snapshot(const RunConfig& config) {
    nlohmann::json j;
    j["dataset"] = config.dataset;
    j["seed"] = config.seed;
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["learning_rate"] = config.learning_rate;
    j["gamma_grid"] = config.gamma_grid;
    j["folds"] = config.folds;
    return j;
}

/// 80/20 stratified split used by train and sweep: fold 0 of a 5-fold
/// assignment validates, the rest trains.
void holdout_split(const bsac::Dataset& ds, std::uint64_t seed, bsac::Dataset& train,
                   bsac::Dataset& validation) {
    bsac::Rng rng(bsac::derive_stream(seed, 0x5917));
    const auto fold_of = bsac::stratified_kfold(ds.labels, 5, rng);
    std::vector<std::size_t> train_rows, val_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        (fold_of[i] == 0 ? val_rows : train_rows).push_back(i);
    }
    train = bsac::dataset_subset(ds, train_rows);
    validation = bsac::dataset_subset(ds, val_rows);
}

int cmd_prepare(const RunConfig& config) {
    const bsac::PreparedDataset prepared = load_prepared(config);
    const fs::path dir = ensure_out_dir(config);
    bsac::atomic_write(dir / "dataset.csv", bsac::dataset_csv(prepared.dataset));
    bsac::atomic_write(dir / "schema.txt", bsac::schema_report(prepared));
    std::cout << "prepared " << prepared.dataset.rows() << " rows, "
              << prepared.dataset.features.cols() << " features -> " << (dir / "dataset.csv")
              << "\n";
    std::cout << "schema report -> " << (dir / "schema.txt") << "\n";
    return 0;
}

int cmd_cv(const RunConfig& config) {
    const bsac::PreparedDataset prepared = load_prepared(config);
    const bsac::SAConfig base = base_sa_config(config, prepared.dataset.features.cols());

    bsac::Rng rng(config.seed);
    const bsac::CVReport report =
        bsac::run_cv(prepared.dataset, base, config.gamma_grid, config.folds, rng);

    const fs::path dir = ensure_out_dir(config);
    bsac::atomic_write(dir / "cv_report.csv", bsac::cv_report_csv(report));
    const std::string table = bsac::cv_report_table(report);
    bsac::atomic_write(dir / "cv_report.txt", table);
    std::vector<std::vector<bsac::GammaSweepRow>> sweeps;
    for (const auto& fold : report.folds) sweeps.push_back(fold.sweep);
    bsac::atomic_write(dir / "gamma_sweep.csv", bsac::sweep_csv(sweeps));

    std::cout << table;
    std::cout << "reports -> " << (dir / "cv_report.csv") << ", " << (dir / "gamma_sweep.csv")
              << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& config) {
    const bsac::PreparedDataset prepared = load_prepared(config);
    const bsac::SAConfig base = base_sa_config(config, prepared.dataset.features.cols());

    bsac::Dataset train, validation;
    holdout_split(prepared.dataset, config.seed, train, validation);
    bsac::Rng rng(config.seed);
    const auto sweep = bsac::gamma_sweep(train, validation, base, config.gamma_grid, rng);

    const fs::path dir = ensure_out_dir(config);
    bsac::atomic_write(dir / "gamma_sweep.csv", bsac::sweep_csv({sweep}));
    std::cout << "sweep of " << sweep.size() << " candidates -> " << (dir / "gamma_sweep.csv")
              << "\n";
    return 0;
}

int cmd_train(const RunConfig& config) {
    const bsac::PreparedDataset prepared = load_prepared(config);
    const bsac::SAConfig base = base_sa_config(config, prepared.dataset.features.cols());

    bsac::Dataset train, validation;
    holdout_split(prepared.dataset, config.seed, train, validation);
    bsac::Rng rng(config.seed);
    bsac::BSACModel model = bsac::train_bsac(train, validation, base, config.gamma_grid, rng);
    model.preprocess = prepared.params;
    model.metadata.seed = config.seed;
    model.metadata.dataset = prepared.kind;

    bsac::ModelArchive archive;
    archive.model = std::move(model);
    archive.dataset_kind = prepared.kind;
    archive.run_config = config_snapshot(config);
    archive.fingerprint = bsac::dataset_fingerprint(prepared.dataset);

    const fs::path dir = ensure_out_dir(config);
    const fs::path path = dir / "model.json";
    bsac::save_model(archive, path);
    std::cout << "pool of " << archive.model.pool_size() << " base classifiers -> " << path
              << "\n";
    return 0;
}

int cmd_predict(const RunConfig& config) {
    if (config.model_path.empty()) throw UsageError("--model is required");
    if (!fs::exists(config.model_path)) {
        throw UsageError("model archive '" + config.model_path + "' does not exist");
    }
    if (config.input.empty()) throw UsageError("--input is required");
    if (!fs::exists(config.input)) {
        throw UsageError("input file '" + config.input + "' does not exist");
    }

    const bsac::ModelArchive archive = bsac::load_model(config.model_path);
    bsac::LoadOptions options;
    if (archive.dataset_kind == "lendingclub") {
        options.keep_columns = bsac::lending_club_required_columns();
        std::erase(options.keep_columns, std::string("loan_status"));
    }
    const bsac::RawTable table = bsac::load_csv(config.input, options);
    const bsac::PredictFeatures pf =
        bsac::build_features_for_predict(archive.dataset_kind, table, archive.model.preprocess);
    const bsac::BSACPrediction pred = bsac::bsac_predict(archive.model, pf.features);

    const fs::path dir = ensure_out_dir(config);
    const fs::path path = dir / "predictions.csv";
    bsac::atomic_write(path, bsac::predictions_csv(pf.source_rows, pred));
    std::cout << pred.labels.size() << " predictions -> " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bagging supervised autoencoder classifier"};
    app.require_subcommand(1);

    OptionSet prepare_opts, train_opts, predict_opts, cv_opts, sweep_opts;
    prepare_opts.attach(app.add_subcommand("prepare", "prepare a dataset and report its schema"),
                        false);
    train_opts.attach(app.add_subcommand("train", "train a model on an 80/20 split"), false);
    predict_opts.attach(app.add_subcommand("predict", "score a CSV with a saved model"), true);
    cv_opts.attach(app.add_subcommand("cv", "stratified k-fold cross-validation"), false);
    sweep_opts.attach(app.add_subcommand("sweep", "gamma sensitivity sweep on a holdout split"),
                      false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (prepare_opts.cmd->parsed()) return cmd_prepare(prepare_opts.resolve());
        if (train_opts.cmd->parsed()) return cmd_train(train_opts.resolve());
        if (predict_opts.cmd->parsed()) return cmd_predict(predict_opts.resolve());
        if (cv_opts.cmd->parsed()) return cmd_cv(cv_opts.resolve());
        if (sweep_opts.cmd->parsed()) return cmd_sweep(sweep_opts.resolve());
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
