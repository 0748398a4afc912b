#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetforest/bench.hpp"
#include "hetforest/dataset.hpp"
#include "hetforest/forest.hpp"
#include "hetforest/model_io.hpp"
#include "hetforest/partition.hpp"
#include "hetforest/stats.hpp"

namespace py = pybind11;
using namespace hetforest;

namespace {

GrowthConfig config_from_kwargs(int minleaf, int mtry, int top_m, double ridge_lambda,
                                double svm_c, double lssvm_c, double mpsvm_delta) {
    GrowthConfig config;
    config.minleaf = minleaf;
    config.mtry = mtry;
    config.top_m = top_m;
    config.ridge_lambda = ridge_lambda;
    config.svm_c = svm_c;
    config.lssvm_c = lssvm_c;
    config.mpsvm_delta = mpsvm_delta;
    return config;
}

Dataset dataset_from_arrays(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                            std::vector<std::string> tokens) {
    Dataset ds;
    ds.features = features;
    ds.labels = labels;
    int k = 0;
    for (int label : labels) k = std::max(k, label + 1);
    ds.class_count = k;
    if (tokens.empty()) {
        for (int c = 0; c < k; ++c) tokens.push_back(std::to_string(c));
    }
    ds.label_tokens = std::move(tokens);
    ds.validate();
    return ds;
}

ResultsMatrix matrix_from_python(const std::vector<std::string>& models,
                                 const std::vector<std::string>& datasets,
                                 const Eigen::MatrixXd& accuracy) {
    ResultsMatrix m;
    m.models = models;
    m.datasets = datasets;
    m.accuracy = accuracy;
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Heterogeneous oblique and double random forests";

    py::register_exception<DataError>(m, "DataError");

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("features", &Dataset::features)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("class_count", &Dataset::class_count)
        .def_readonly("label_tokens", &Dataset::label_tokens)
        .def_readonly("feature_names", &Dataset::feature_names)
        .def_readonly("name", &Dataset::name)
        .def_property_readonly("rows", &Dataset::rows)
        .def_property_readonly("cols", &Dataset::cols)
        .def("__repr__", [](const Dataset& ds) {
            return "<Dataset rows=" + std::to_string(ds.rows()) +
                   " features=" + std::to_string(ds.cols()) +
                   " classes=" + std::to_string(ds.class_count) + ">";
        });

    m.def(
        "load_csv",
        [](const std::string& path, bool has_header, int label_column) {
            CsvOptions options;
            options.has_header = has_header;
            options.label_column = label_column;
            return load_csv(path, options);
        },
        py::arg("path"), py::arg("has_header") = false, py::arg("label_column") = -1);

    m.def("make_dataset", &dataset_from_arrays, py::arg("features"), py::arg("labels"),
          py::arg("label_tokens") = std::vector<std::string>{});

    m.def(
        "stratified_kfold",
        [](const Dataset& ds, int k, std::uint64_t seed) {
            FoldPlan plan = stratified_kfold(ds, k, seed);
            std::vector<std::pair<IndexSet, IndexSet>> out;
            for (const auto& fold : plan.folds) out.emplace_back(fold.train, fold.test);
            return out;
        },
        py::arg("dataset"), py::arg("k"), py::arg("seed") = 0);

    m.def("bootstrap", &bootstrap, py::arg("source"), py::arg("seed"));

    py::class_<ForestModel>(m, "ForestModel")
        .def_property_readonly("variant",
                               [](const ForestModel& model) { return variant_name(model.variant); })
        .def_readonly("ntree", &ForestModel::ntree)
        .def_readonly("class_count", &ForestModel::class_count)
        .def_readonly("feature_count", &ForestModel::feature_count)
        .def_readonly("label_tokens", &ForestModel::label_tokens)
        .def_property_readonly("mean_nodes", &ForestModel::mean_nodes)
        .def_property_readonly("mean_depth", &ForestModel::mean_depth)
        .def("predict",
             [](const ForestModel& model, const Eigen::MatrixXd& features) {
                 return predict_rows(model, features);
             })
        .def("predict_tokens",
             [](const ForestModel& model, const Eigen::MatrixXd& features) {
                 std::vector<std::string> out;
                 for (int label : predict_rows(model, features)) {
                     out.push_back(model.label_tokens[label]);
                 }
                 return out;
             })
        .def("to_json", &model_to_json)
        .def("__repr__", [](const ForestModel& model) {
            return "<ForestModel variant=" + variant_name(model.variant) +
                   " ntree=" + std::to_string(model.ntree) + ">";
        });

    m.def(
        "train_forest",
        [](const Dataset& ds, const std::string& variant, int ntree, std::uint64_t seed,
           bool normalize, int threads, int minleaf, int mtry, int top_m, double ridge_lambda,
           double svm_c, double lssvm_c, double mpsvm_delta) {
            auto parsed = parse_variant(variant);
            if (!parsed) throw DataError("unknown variant \"" + variant + "\"");
            TrainOptions options;
            options.ntree = ntree;
            options.seed = seed;
            options.normalize = normalize;
            options.threads = threads;
            return train_forest(ds, *parsed,
                                config_from_kwargs(minleaf, mtry, top_m, ridge_lambda, svm_c,
                                                   lssvm_c, mpsvm_delta),
                                options);
        },
        py::arg("dataset"), py::arg("variant"), py::arg("ntree") = 50, py::arg("seed") = 0,
        py::arg("normalize") = true, py::arg("threads") = 0, py::arg("minleaf") = 1,
        py::arg("mtry") = 0, py::arg("top_m") = 0, py::arg("ridge_lambda") = 0.1,
        py::arg("svm_c") = 1.0, py::arg("lssvm_c") = 1.0, py::arg("mpsvm_delta") = 0.01);

    m.def(
        "evaluate",
        [](const ForestModel& model, const Dataset& ds, std::optional<IndexSet> rows) {
            IndexSet test_rows = rows ? *rows : all_rows(ds.rows());
            Evaluation eval = evaluate(model, test_rows, ds);
            return py::make_tuple(eval.accuracy, eval.confusion);
        },
        py::arg("model"), py::arg("dataset"), py::arg("rows") = std::nullopt);

    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
    m.def("model_from_json", &model_from_json, py::arg("text"));

    m.def("variants", [] {
        std::vector<std::string> names;
        for (auto v : all_variants()) names.push_back(variant_name(v));
        return names;
    });

    m.def(
        "average_ranks",
        [](const std::vector<std::string>& models, const std::vector<std::string>& datasets,
           const Eigen::MatrixXd& accuracy) {
            return average_ranks(matrix_from_python(models, datasets, accuracy));
        },
        py::arg("models"), py::arg("datasets"), py::arg("accuracy"));
    m.def("friedman_chi2", &friedman_chi2, py::arg("ranks"), py::arg("dataset_count"));
    m.def("friedman_f", &friedman_f, py::arg("chi2"), py::arg("dataset_count"),
          py::arg("model_count"));
    m.def("nemenyi_cd", &nemenyi_cd, py::arg("q_alpha"), py::arg("model_count"),
          py::arg("dataset_count"));
    m.def("nemenyi_q_alpha05", &nemenyi_q_alpha05, py::arg("model_count"));
    m.def("sign_test_threshold", &sign_test_threshold, py::arg("dataset_count"));
    m.def(
        "win_tie_loss",
        [](const std::vector<std::string>& models, const std::vector<std::string>& datasets,
           const Eigen::MatrixXd& accuracy) {
            auto table = win_tie_loss(matrix_from_python(models, datasets, accuracy));
            py::list rows;
            for (const auto& row : table) {
                py::list cells;
                for (const auto& cell : row) {
                    cells.append(py::make_tuple(cell.wins, cell.ties, cell.losses,
                                                cell.significant));
                }
                rows.append(cells);
            }
            return rows;
        },
        py::arg("models"), py::arg("datasets"), py::arg("accuracy"));
    m.def(
        "significance_table",
        [](const std::vector<double>& ranks, double cd) {
            auto marks = significance_table(ranks, cd);
            std::vector<std::vector<std::string>> out;
            for (const auto& row : marks) {
                std::vector<std::string> cells;
                for (auto mark : row) {
                    cells.push_back(mark == SignificanceMark::kRowBetter  ? "r+"
                                    : mark == SignificanceMark::kRowWorse ? "r-"
                                                                          : "");
                }
                out.push_back(std::move(cells));
            }
            return out;
        },
        py::arg("ranks"), py::arg("cd"));
    m.def(
        "render_report",
        [](const std::vector<std::string>& models, const std::vector<std::string>& datasets,
           const Eigen::MatrixXd& accuracy, double alpha, std::optional<double> q_alpha,
           std::optional<int> paper_n) {
            ReportOptions options;
            options.alpha = alpha;
            options.q_alpha = q_alpha;
            options.paper_n = paper_n;
            return render_report(matrix_from_python(models, datasets, accuracy), options);
        },
        py::arg("models"), py::arg("datasets"), py::arg("accuracy"), py::arg("alpha") = 0.05,
        py::arg("q_alpha") = std::nullopt, py::arg("paper_n") = std::nullopt);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
