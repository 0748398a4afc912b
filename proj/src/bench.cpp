#include "hetforest/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "hetforest/random.hpp"

namespace hetforest {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

/// Minimal TOML subset: comments, [table] and [table.sub] headers,
/// key = scalar or flat array of scalars. Enough for bench specs.
json parse_toml_subset(const std::string& text, const std::string& origin) {
    json root = json::object();
    json* current = &root;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto fail = [&](const std::string& what) {
        throw DataError(origin + ":" + std::to_string(line_no) + ": " + what);
    };

    auto parse_scalar = [&](std::string token) -> json {
        token = trim(token);
        if (token.empty()) fail("empty value");
        if (token.front() == '"' || token.front() == '\'') {
            if (token.size() < 2 || token.back() != token.front()) fail("unterminated string");
            return token.substr(1, token.size() - 2);
        }
        if (token == "true") return true;
        if (token == "false") return false;
        try {
            if (token.find_first_of(".eE") != std::string::npos) return std::stod(token);
            return static_cast<std::int64_t>(std::stoll(token));
        } catch (const std::exception&) {
            fail("cannot parse value \"" + token + "\"");
        }
        return nullptr;
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        // Strip trailing comments outside strings.
        bool in_string = false;
        char quote = 0;
        for (std::size_t i = 0; i < stripped.size(); ++i) {
            char c = stripped[i];
            if (in_string) {
                if (c == quote) in_string = false;
            } else if (c == '"' || c == '\'') {
                in_string = true;
                quote = c;
            } else if (c == '#') {
                stripped = trim(stripped.substr(0, i));
                break;
            }
        }
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']') fail("malformed table header");
            std::string path = trim(stripped.substr(1, stripped.size() - 2));
            current = &root;
            std::istringstream parts(path);
            std::string part;
            while (std::getline(parts, part, '.')) {
                part = trim(part);
                if (!part.empty() && (part.front() == '"' || part.front() == '\'')) {
                    part = part.substr(1, part.size() - 2);
                }
                if (part.empty()) fail("empty table name");
                current = &(*current)[part];
                if (current->is_null()) *current = json::object();
            }
            continue;
        }

        auto eq = stripped.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        if (!key.empty() && (key.front() == '"' || key.front() == '\'')) {
            key = key.substr(1, key.size() - 2);
        }
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) fail("empty key");

        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') fail("unterminated array");
            json arr = json::array();
            std::string body = value.substr(1, value.size() - 2);
            std::string item;
            bool quoted = false;
            char qchar = 0;
            for (char c : body) {
                if (quoted) {
                    item += c;
                    if (c == qchar) quoted = false;
                } else if (c == '"' || c == '\'') {
                    item += c;
                    quoted = true;
                    qchar = c;
                } else if (c == ',') {
                    if (!trim(item).empty()) arr.push_back(parse_scalar(item));
                    item.clear();
                } else {
                    item += c;
                }
            }
            if (!trim(item).empty()) arr.push_back(parse_scalar(item));
            (*current)[key] = std::move(arr);
        } else {
            (*current)[key] = parse_scalar(value);
        }
    }
    return root;
}

BenchSpec spec_from_json(const json& doc, const std::string& origin) {
    BenchSpec spec;
    try {
        if (!doc.contains("datasets") || doc.at("datasets").empty()) {
            throw DataError(origin + ": spec needs at least one dataset");
        }
        spec.dataset_paths = doc.at("datasets").get<std::vector<std::string>>();

        if (!doc.contains("variants") || doc.at("variants").empty()) {
            throw DataError(origin + ": spec needs at least one variant");
        }
        for (const auto& name : doc.at("variants").get<std::vector<std::string>>()) {
            auto v = parse_variant(name);
            if (!v) throw DataError(origin + ": unknown variant \"" + name + "\"");
            spec.variants.push_back(*v);
        }

        spec.ntree = doc.value("ntree", spec.ntree);
        spec.folds = doc.value("folds", spec.folds);
        spec.repetitions = doc.value("reps", spec.repetitions);
        spec.seed = doc.value("seed", spec.seed);
        spec.normalize = doc.value("normalize", spec.normalize);
        spec.minleaf = doc.value("minleaf", spec.minleaf);
        if (doc.contains("mtry")) {
            if (doc.at("mtry").is_string()) {
                if (doc.at("mtry").get<std::string>() != "sqrt") {
                    throw DataError(origin + ": mtry must be \"sqrt\" or an integer");
                }
                spec.mtry = 0;
            } else {
                spec.mtry = doc.at("mtry").get<int>();
            }
        }
        spec.top_m = doc.value("topm", spec.top_m);
        spec.ridge_lambda = doc.value("ridge_lambda", spec.ridge_lambda);
        spec.svm_c = doc.value("svm_c", spec.svm_c);
        spec.lssvm_c = doc.value("lssvm_c", spec.lssvm_c);
        spec.mpsvm_delta = doc.value("mpsvm_delta", spec.mpsvm_delta);

        if (doc.contains("overrides")) {
            for (const auto& [name, entry] : doc.at("overrides").items()) {
                if (!parse_variant(name)) {
                    throw DataError(origin + ": override for unknown variant \"" + name + "\"");
                }
                VariantOverrides o;
                if (entry.contains("ntree")) o.ntree = entry.at("ntree").get<int>();
                if (entry.contains("minleaf")) o.minleaf = entry.at("minleaf").get<int>();
                if (entry.contains("mtry")) o.mtry = entry.at("mtry").get<int>();
                if (entry.contains("topm")) o.top_m = entry.at("topm").get<int>();
                if (entry.contains("ridge_lambda")) o.ridge_lambda = entry.at("ridge_lambda").get<double>();
                if (entry.contains("svm_c")) o.svm_c = entry.at("svm_c").get<double>();
                if (entry.contains("lssvm_c")) o.lssvm_c = entry.at("lssvm_c").get<double>();
                if (entry.contains("mpsvm_delta")) o.mpsvm_delta = entry.at("mpsvm_delta").get<double>();
                spec.overrides[name] = o;
            }
        }
    } catch (const json::exception& e) {
        throw DataError(origin + ": malformed bench spec: " + e.what());
    }
    if (spec.folds < 2) throw DataError(origin + ": folds must be >= 2");
    if (spec.repetitions < 1) throw DataError(origin + ": reps must be >= 1");
    if (spec.ntree < 1) throw DataError(origin + ": ntree must be >= 1");
    return spec;
}

std::string dataset_key(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

const char* const kResultsCsvHeader = "dataset,variant,rep,fold,accuracy,train_seconds,mean_nodes";

BenchSpec load_bench_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open spec file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw DataError(path + ": spec file is empty");
    if (text[first] == '{') {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            throw DataError(path + ": invalid JSON: " + e.what());
        }
        return spec_from_json(doc, path);
    }
    return spec_from_json(parse_toml_subset(text, path), path);
}

std::string format_record(const ResultRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.6f,%.4f,%.2f", r.dataset.c_str(),
                  r.variant.c_str(), r.rep, r.fold, r.accuracy, r.train_seconds, r.mean_nodes);
    return buf;
}

std::vector<ResultRecord> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty results file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsCsvHeader) {
        throw DataError(path + ": unknown results schema (header mismatch)");
    }

    std::vector<ResultRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 7 columns");
        }
        try {
            ResultRecord r;
            r.dataset = cells[0];
            r.variant = cells[1];
            r.rep = std::stoi(cells[2]);
            r.fold = std::stoi(cells[3]);
            r.accuracy = std::stod(cells[4]);
            r.train_seconds = std::stod(cells[5]);
            r.mean_nodes = std::stod(cells[6]);
            records.push_back(std::move(r));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": unparsable record");
        }
    }
    return records;
}

BenchOutcome run_bench(const BenchSpec& spec, const std::string& out_csv,
                       const std::function<void(const std::string&)>& log) {
    auto say = [&](const std::string& msg) {
        if (log) log(msg);
    };

    // Resume: keep completed keys, append the rest.
    std::set<std::string> done;
    bool have_file = false;
    {
        std::ifstream probe(out_csv);
        have_file = probe.good();
    }
    if (have_file) {
        for (const auto& r : read_results_csv(out_csv)) {
            done.insert(r.dataset + "|" + r.variant + "|" + std::to_string(r.rep) + "|" +
                        std::to_string(r.fold));
        }
    }

    std::ofstream out(out_csv, std::ios::app);
    if (!out) throw DataError("cannot write results file: " + out_csv);
    if (!have_file) out << kResultsCsvHeader << '\n';

    BenchOutcome outcome;
    outcome.skipped = static_cast<int>(done.size());

    for (const auto& path : spec.dataset_paths) {
        ++outcome.attempted_datasets;
        Dataset ds;
        try {
            ds = load_csv(path);
        } catch (const DataError& e) {
            say(std::string("skipping dataset: ") + e.what());
            outcome.failed_datasets.push_back(path);
            continue;
        }
        const std::string ds_key = dataset_key(path);

        for (Variant variant : spec.variants) {
            const std::string v_name = variant_name(variant);
            GrowthConfig config;
            config.minleaf = spec.minleaf;
            config.mtry = spec.mtry;
            config.top_m = spec.top_m;
            config.ridge_lambda = spec.ridge_lambda;
            config.svm_c = spec.svm_c;
            config.lssvm_c = spec.lssvm_c;
            config.mpsvm_delta = spec.mpsvm_delta;
            int ntree = spec.ntree;
            if (auto it = spec.overrides.find(v_name); it != spec.overrides.end()) {
                const VariantOverrides& o = it->second;
                if (o.ntree) ntree = *o.ntree;
                if (o.minleaf) config.minleaf = *o.minleaf;
                if (o.mtry) config.mtry = *o.mtry;
                if (o.top_m) config.top_m = *o.top_m;
                if (o.ridge_lambda) config.ridge_lambda = *o.ridge_lambda;
                if (o.svm_c) config.svm_c = *o.svm_c;
                if (o.lssvm_c) config.lssvm_c = *o.lssvm_c;
                if (o.mpsvm_delta) config.mpsvm_delta = *o.mpsvm_delta;
            }

            for (int rep = 0; rep < spec.repetitions; ++rep) {
                const std::uint64_t fold_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));
                FoldPlan plan;
                try {
                    plan = stratified_kfold(ds, spec.folds, fold_seed);
                } catch (const DataError& e) {
                    say(std::string("skipping ") + ds_key + ": " + e.what());
                    if (rep == 0) outcome.failed_datasets.push_back(path);
                    break;
                }
                for (int fold = 0; fold < spec.folds; ++fold) {
                    const std::string key = ds_key + "|" + v_name + "|" + std::to_string(rep) +
                                            "|" + std::to_string(fold);
                    if (done.count(key)) continue;

                    Dataset train_ds = subset(ds, plan.folds[fold].train);
                    TrainOptions train_options;
                    train_options.ntree = ntree;
                    train_options.normalize = spec.normalize;
                    // Deterministic per-cell seed chain; independent of
                    // evaluation order so resumed runs agree.
                    train_options.seed = derive_seed(
                        derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(rep)),
                                    static_cast<std::uint64_t>(fold)),
                        static_cast<std::uint64_t>(variant));

                    const auto start = std::chrono::steady_clock::now();
                    ForestModel model = train_forest(train_ds, variant, config, train_options);
                    const auto elapsed = std::chrono::duration<double>(
                                             std::chrono::steady_clock::now() - start)
                                             .count();
                    Evaluation eval = evaluate(model, plan.folds[fold].test, ds);

                    ResultRecord record;
                    record.dataset = ds_key;
                    record.variant = v_name;
                    record.rep = rep;
                    record.fold = fold;
                    record.accuracy = eval.accuracy;
                    record.train_seconds = elapsed;
                    record.mean_nodes = model.mean_nodes();
                    out << format_record(record) << '\n';
                    out.flush();
                    done.insert(key);
                    ++outcome.completed;
                    say(key + " accuracy=" + std::to_string(eval.accuracy));
                }
            }
        }
    }
    return outcome;
}

ResultsMatrix results_to_matrix(const std::vector<ResultRecord>& records) {
    std::vector<std::string> models, datasets;
    for (const auto& r : records) {
        if (std::find(models.begin(), models.end(), r.variant) == models.end()) {
            models.push_back(r.variant);
        }
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
            datasets.push_back(r.dataset);
        }
    }
    std::sort(models.begin(), models.end());
    std::sort(datasets.begin(), datasets.end());

    const int n = static_cast<int>(models.size());
    const int d = static_cast<int>(datasets.size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, d);
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, d);
    auto model_index = [&](const std::string& name) {
        return static_cast<int>(std::find(models.begin(), models.end(), name) - models.begin());
    };
    auto dataset_index = [&](const std::string& name) {
        return static_cast<int>(std::find(datasets.begin(), datasets.end(), name) -
                                datasets.begin());
    };
    for (const auto& r : records) {
        const int i = model_index(r.variant);
        const int j = dataset_index(r.dataset);
        sums(i, j) += r.accuracy;
        counts(i, j) += 1;
    }

    std::string missing;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            if (counts(i, j) == 0) {
                missing += (missing.empty() ? "" : ", ") + models[i] + "/" + datasets[j];
            }
        }
    }
    if (!missing.empty()) throw DataError("missing (variant, dataset) pairs: " + missing);

    ResultsMatrix m;
    m.models = std::move(models);
    m.datasets = std::move(datasets);
    m.accuracy = sums.cwiseQuotient(counts.cast<double>());
    return m;
}

}  // namespace hetforest
