#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "hetforest/bench.hpp"
#include "hetforest/dataset.hpp"
#include "hetforest/forest.hpp"
#include "hetforest/model_io.hpp"
#include "hetforest/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string variant_list() {
    std::string out;
    for (auto v : hetforest::all_variants()) {
        if (!out.empty()) out += ", ";
        out += hetforest::variant_name(v);
    }
    return out;
}

struct TrainArgs {
    std::string data;
    std::string variant = "het-draf";
    std::string out;
    int ntree = 50;
    int minleaf = 1;
    std::string mtry = "sqrt";
    std::uint64_t seed = 0;
    bool no_normalize = false;
    double ridge_lambda = 0.1;
    double svm_c = 1.0;
    double lssvm_c = 1.0;
    double mpsvm_delta = 0.01;
    int top_m = 0;
    int threads = 0;
};

int parse_mtry(const std::string& text) {
    if (text == "sqrt") return 0;
    int value = std::stoi(text);
    if (value < 1) throw hetforest::DataError("--mtry must be \"sqrt\" or a positive integer");
    return value;
}

int run_train(const TrainArgs& args) {
    auto variant = hetforest::parse_variant(args.variant);
    if (!variant) {
        std::cerr << "unknown variant \"" << args.variant << "\"; valid variants: "
                  << variant_list() << "\n";
        return kExitUsage;
    }
    hetforest::Dataset ds = hetforest::load_csv(args.data);

    hetforest::GrowthConfig config;
    config.minleaf = args.minleaf;
    config.mtry = parse_mtry(args.mtry);
    config.top_m = args.top_m;
    config.ridge_lambda = args.ridge_lambda;
    config.svm_c = args.svm_c;
    config.lssvm_c = args.lssvm_c;
    config.mpsvm_delta = args.mpsvm_delta;

    hetforest::TrainOptions options;
    options.ntree = args.ntree;
    options.seed = args.seed;
    options.normalize = !args.no_normalize;
    options.threads = args.threads;

    hetforest::ForestModel model = hetforest::train_forest(ds, *variant, config, options);
    hetforest::save_model(model, args.out);

    std::printf("variant: %s\n", hetforest::variant_name(model.variant).c_str());
    std::printf("trees: %d\n", model.ntree);
    std::printf("mean depth: %.2f\n", model.mean_depth());
    std::printf("mean node count: %.2f\n", model.mean_nodes());
    std::printf("model written to %s\n", args.out.c_str());
    return kExitOk;
}

struct PredictArgs {
    std::string model;
    std::string data;
    std::string out;
};

int run_predict(const PredictArgs& args) {
    hetforest::ForestModel model = hetforest::load_model(args.model);

    // The input may carry a trailing label column; it is ignored.
    std::ifstream probe(args.data);
    if (!probe) throw hetforest::DataError("cannot open file: " + args.data);
    std::string first_line;
    if (!std::getline(probe, first_line)) {
        throw hetforest::DataError(args.data + ": file is empty");
    }
    int columns = 1;
    for (char c : first_line) {
        if (c == ',') ++columns;
    }
    probe.close();

    Eigen::MatrixXd features;
    if (columns == model.feature_count + 1) {
        hetforest::Dataset ds = hetforest::load_csv(args.data);
        features = ds.features;
    } else if (columns == model.feature_count) {
        // Feature-only rows: parse through the CSV loader with a dummy
        // label column appended.
        std::ifstream in(args.data);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::string tmp = args.out + ".features.tmp";
        {
            std::ofstream patched(tmp);
            std::istringstream lines(text);
            std::string line;
            bool odd = false;
            while (std::getline(lines, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                patched << line << (odd ? ",b" : ",a") << '\n';
                odd = !odd;
            }
        }
        hetforest::Dataset ds = hetforest::load_csv(tmp);
        std::remove(tmp.c_str());
        features = ds.features;
    } else {
        throw hetforest::DataError(args.data + ": expected " +
                                   std::to_string(model.feature_count) + " feature columns, got " +
                                   std::to_string(columns));
    }

    std::vector<int> predictions = hetforest::predict_rows(model, features);
    std::ofstream out(args.out);
    if (!out) throw hetforest::DataError("cannot write predictions: " + args.out);
    for (int label : predictions) out << model.label_tokens[label] << '\n';
    std::printf("wrote %zu predictions to %s\n", predictions.size(), args.out.c_str());
    return kExitOk;
}

struct BenchArgs {
    std::string spec;
    std::string out;
    bool quiet = false;
};

int run_bench_cmd(const BenchArgs& args) {
    hetforest::BenchSpec spec = hetforest::load_bench_spec(args.spec);
    auto log = [&](const std::string& line) {
        if (!args.quiet) std::fprintf(stderr, "%s\n", line.c_str());
    };
    hetforest::BenchOutcome outcome = hetforest::run_bench(spec, args.out, log);
    std::printf("completed %d records (%d already present) -> %s\n", outcome.completed,
                outcome.skipped, args.out.c_str());
    if (!outcome.failed_datasets.empty()) {
        for (const auto& path : outcome.failed_datasets) {
            std::fprintf(stderr, "failed dataset: %s\n", path.c_str());
        }
        if (static_cast<int>(outcome.failed_datasets.size()) == outcome.attempted_datasets) {
            std::fprintf(stderr, "all datasets failed\n");
            return kExitData;
        }
    }
    return kExitOk;
}

struct ReportArgs {
    std::string results;
    std::string out;
    double alpha = 0.05;
    double q_alpha = -1.0;
    int paper_n = 0;
    std::string unit = "fraction";
};

int run_report(const ReportArgs& args) {
    auto records = hetforest::read_results_csv(args.results);
    if (records.empty()) throw hetforest::DataError(args.results + ": no records");
    hetforest::ResultsMatrix matrix = hetforest::results_to_matrix(records);
    if (matrix.models.size() < 2) {
        throw hetforest::DataError("report needs at least 2 variants in the results");
    }

    hetforest::ReportOptions options;
    options.alpha = args.alpha;
    if (args.q_alpha >= 0) options.q_alpha = args.q_alpha;
    if (args.paper_n > 0) options.paper_n = args.paper_n;
    options.accuracy_unit = args.unit;

    const std::string report = hetforest::render_report(matrix, options);
    std::ofstream out(args.out);
    if (!out) throw hetforest::DataError("cannot write report: " + args.out);
    out << report;
    std::printf("report written to %s\n", args.out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetforest: heterogeneous oblique and double random forests"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train a forest on a CSV file");
    train->add_option("--data", train_args.data, "Training CSV (label in last column)")->required();
    train->add_option("--variant", train_args.variant, "One of: " + variant_list());
    train->add_option("--ntree", train_args.ntree, "Number of trees");
    train->add_option("--minleaf", train_args.minleaf, "Leaf size threshold");
    train->add_option("--mtry", train_args.mtry, "\"sqrt\" or an explicit feature count");
    train->add_option("--seed", train_args.seed, "Training seed");
    train->add_option("--out", train_args.out, "Output model path")->required();
    train->add_flag("--no-normalize", train_args.no_normalize, "Disable z-score normalization");
    train->add_option("--ridge-lambda", train_args.ridge_lambda, "Ridge penalty");
    train->add_option("--svm-c", train_args.svm_c, "SVM margin penalty");
    train->add_option("--lssvm-c", train_args.lssvm_c, "LSSVM penalty");
    train->add_option("--mpsvm-delta", train_args.mpsvm_delta, "MPSVM Tikhonov delta");
    train->add_option("--topm", train_args.top_m, "Partition budget (0 = class count)");
    train->add_option("--threads", train_args.threads, "Worker threads (0 = auto)");

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "Predict labels with a saved model");
    predict->add_option("--model", predict_args.model, "Model JSON path")->required();
    predict->add_option("--data", predict_args.data, "Input CSV")->required();
    predict->add_option("--out", predict_args.out, "Output predictions path")->required();

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run a cross-validated benchmark");
    bench->add_option("--spec", bench_args.spec, "Bench spec (JSON or TOML)")->required();
    bench->add_option("--out", bench_args.out, "Results CSV path")->required();
    bench->add_flag("--quiet", bench_args.quiet, "Suppress progress lines");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Render rank statistics from a results CSV");
    report->add_option("--results", report_args.results, "Results CSV path")->required();
    report->add_option("--out", report_args.out, "Report markdown path")->required();
    report->add_option("--alpha", report_args.alpha, "Significance level");
    report->add_option("--q-alpha", report_args.q_alpha, "Nemenyi q (default: bundled table)");
    report->add_option("--paper-n", report_args.paper_n, "Override N in the rank statistics");
    report->add_option("--unit", report_args.unit, "Accuracy unit label");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) return run_train(train_args);
        if (predict->parsed()) return run_predict(predict_args);
        if (bench->parsed()) return run_bench_cmd(bench_args);
        if (report->parsed()) return run_report(report_args);
        return kExitUsage;
    } catch (const hetforest::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
}
