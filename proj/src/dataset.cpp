#include "hetforest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hetforest/random.hpp"

namespace hetforest {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string file_stem(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

void Dataset::validate() const {
    const int n = rows();
    const int f = cols();
    if (f < 1) throw DataError("dataset has no feature columns");
    if (class_count < 2) throw DataError("fewer than 2 classes");
    if (n < class_count) throw DataError("fewer rows than classes");
    if (static_cast<int>(labels.size()) != n) throw DataError("label count does not match row count");
    std::vector<bool> seen(class_count, false);
    for (int label : labels) {
        if (label < 0 || label >= class_count) throw DataError("label index out of range");
        seen[label] = true;
    }
    for (int c = 0; c < class_count; ++c) {
        if (!seen[c]) throw DataError("class " + std::to_string(c) + " has no samples");
    }
    if (!features.allFinite()) throw DataError("non-finite feature value");
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError(path + ": file is empty");

    std::size_t first_row = 0;
    std::vector<std::string> header;
    if (options.has_header) {
        header = split_line(lines[0]);
        first_row = 1;
        if (lines.size() == 1) throw DataError(path + ": no data rows after header");
    }

    const int columns = static_cast<int>(split_line(lines[first_row]).size());
    if (columns < 2) throw DataError(path + ": need at least one feature column and a label column");
    int label_col = options.label_column < 0 ? columns - 1 : options.label_column;
    if (label_col >= columns) throw DataError(path + ": label column out of range");
    const int f = columns - 1;

    const int n = static_cast<int>(lines.size() - first_row);
    Eigen::MatrixXd features(n, f);
    std::vector<std::string> tokens(n);

    for (int r = 0; r < n; ++r) {
        const std::string& raw = lines[first_row + r];
        auto cells = split_line(raw);
        if (static_cast<int>(cells.size()) != columns) {
            throw DataError(path + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(columns));
        }
        int out_col = 0;
        for (int c = 0; c < columns; ++c) {
            std::string cell = trim(cells[c]);
            if (c == label_col) {
                if (cell.empty())
                    throw DataError(path + ": empty label at row " + std::to_string(r + 1));
                tokens[r] = cell;
                continue;
            }
            double value = 0.0;
            if (!parse_double(cell, value) || !std::isfinite(value)) {
                throw DataError(path + ": non-numeric feature cell at row " +
                                std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                                " (\"" + cell + "\")");
            }
            features(r, out_col++) = value;
        }
    }

    // Dense re-encoding in lexicographic token order.
    std::map<std::string, int> token_index;
    for (const auto& t : tokens) token_index.emplace(t, 0);
    if (token_index.size() < 2) throw DataError(path + ": fewer than 2 classes");
    int next = 0;
    for (auto& [token, index] : token_index) index = next++;

    Dataset ds;
    ds.features = std::move(features);
    ds.labels.resize(n);
    for (int r = 0; r < n; ++r) ds.labels[r] = token_index.at(tokens[r]);
    ds.class_count = static_cast<int>(token_index.size());
    ds.label_tokens.resize(ds.class_count);
    for (const auto& [token, index] : token_index) ds.label_tokens[index] = token;
    if (options.has_header) {
        for (int c = 0; c < columns; ++c) {
            if (c != label_col) ds.feature_names.push_back(trim(header[c]));
        }
    }
    ds.name = file_stem(path);
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out.precision(17);
    for (int r = 0; r < ds.rows(); ++r) {
        for (int c = 0; c < ds.cols(); ++c) out << ds.features(r, c) << ',';
        out << ds.label_tokens[ds.labels[r]] << '\n';
    }
}

FoldPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("fold count must be at least 2");
    const int n = ds.rows();

    std::vector<std::vector<int>> by_class(ds.class_count);
    for (int r = 0; r < n; ++r) by_class[ds.labels[r]].push_back(r);
    for (int c = 0; c < ds.class_count; ++c) {
        if (static_cast<int>(by_class[c].size()) < k) {
            throw DataError("class \"" + ds.label_tokens[c] + "\" has " +
                            std::to_string(by_class[c].size()) + " samples, fewer than k=" +
                            std::to_string(k));
        }
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.resize(k);

    // Shuffle within each class, then deal round-robin. The dealing
    // counter persists across classes so leftover samples rotate through
    // the folds and total fold sizes stay within one of each other.
    std::vector<std::vector<int>> test_sets(k);
    int next_fold = 0;
    for (int c = 0; c < ds.class_count; ++c) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        shuffle(by_class[c], rng);
        for (int row : by_class[c]) {
            test_sets[next_fold].push_back(row);
            next_fold = (next_fold + 1) % k;
        }
    }

    for (int fold = 0; fold < k; ++fold) {
        std::sort(test_sets[fold].begin(), test_sets[fold].end());
        std::vector<bool> in_test(n, false);
        for (int r : test_sets[fold]) in_test[r] = true;
        for (int r = 0; r < n; ++r) {
            if (!in_test[r]) plan.folds[fold].train.push_back(r);
        }
        plan.folds[fold].test = std::move(test_sets[fold]);
    }
    return plan;
}

IndexSet bootstrap(const IndexSet& source, std::uint64_t seed) {
    if (source.empty()) throw DataError("bootstrap source is empty");
    SplitMix64 rng(seed);
    IndexSet out(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        out[i] = source[rng.next_below(source.size())];
    }
    return out;
}

IndexSet all_rows(int n) {
    IndexSet out(n);
    for (int i = 0; i < n; ++i) out[i] = i;
    return out;
}

Dataset subset(const Dataset& ds, const IndexSet& rows) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
        out.labels[i] = ds.labels[rows[i]];
    }
    out.class_count = ds.class_count;
    out.label_tokens = ds.label_tokens;
    out.feature_names = ds.feature_names;
    out.name = ds.name;
    return out;
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& features, const IndexSet& rows) {
    const int f = static_cast<int>(features.cols());
    const double n = static_cast<double>(rows.size());
    Normalizer norm;
    norm.mean = Eigen::VectorXd::Zero(f);
    norm.scale = Eigen::VectorXd::Ones(f);
    if (rows.empty()) return norm;
    for (int r : rows) norm.mean += features.row(r).transpose();
    norm.mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(f);
    for (int r : rows) {
        Eigen::VectorXd d = features.row(r).transpose() - norm.mean;
        var += d.cwiseProduct(d);
    }
    var /= n;
    for (int j = 0; j < f; ++j) {
        double sd = std::sqrt(var[j]);
        norm.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return norm;
}

Eigen::RowVectorXd Normalizer::apply(const Eigen::RowVectorXd& x) const {
    return (x - mean.transpose()).cwiseQuotient(scale.transpose());
}

Eigen::MatrixXd Normalizer::apply_matrix(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
}

}  // namespace hetforest
