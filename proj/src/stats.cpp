#include "hetforest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hetforest {

namespace {

void check_matrix(const ResultsMatrix& m) {
    const int n = static_cast<int>(m.models.size());
    const int datasets = static_cast<int>(m.datasets.size());
    if (n < 2 || datasets < 1) throw std::invalid_argument("results matrix needs >= 2 models and >= 1 dataset");
    if (m.accuracy.rows() != n || m.accuracy.cols() != datasets) {
        throw std::invalid_argument("results matrix dimensions do not match its names");
    }
    if (!m.accuracy.allFinite()) throw std::invalid_argument("results matrix has missing cells");
}

std::string fmt(double value, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

// Nemenyi q at alpha = 0.05 for n = 2..20 (studentized range at infinite
// df over sqrt(2)); the n = 9 entry matches the published 3.1020.
constexpr double kQAlpha05[] = {
    1.9600, 2.3435, 2.5690, 2.7283, 2.8499, 2.9489, 3.0310, 3.1020, 3.1637, 3.2187,
    3.2679, 3.3125, 3.3536, 3.3911, 3.4257, 3.4582, 3.4887, 3.5169, 3.5438,
};

}  // namespace

std::vector<double> average_ranks(const ResultsMatrix& m) {
    check_matrix(m);
    const int n = static_cast<int>(m.models.size());
    const int datasets = static_cast<int>(m.datasets.size());
    std::vector<double> sums(n, 0.0);

    std::vector<int> order(n);
    for (int d = 0; d < datasets; ++d) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return m.accuracy(a, d) > m.accuracy(b, d);  // rank 1 = best accuracy
        });
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && m.accuracy(order[j + 1], d) == m.accuracy(order[i], d)) ++j;
            // Tied block occupies positions i..j; everyone gets the average rank.
            const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (int p = i; p <= j; ++p) sums[order[p]] += rank;
            i = j + 1;
        }
    }
    for (double& s : sums) s /= static_cast<double>(datasets);
    return sums;
}

double friedman_chi2(const std::vector<double>& ranks, int dataset_count) {
    const double n = static_cast<double>(ranks.size());
    if (ranks.size() < 2 || dataset_count < 1) {
        throw std::invalid_argument("friedman_chi2 needs >= 2 models and >= 1 dataset");
    }
    double sum_sq = 0.0;
    for (double r : ranks) sum_sq += r * r;
    return 12.0 * static_cast<double>(dataset_count) / (n * (n + 1.0)) *
           (sum_sq - n * (n + 1.0) * (n + 1.0) / 4.0);
}

double friedman_f(double chi2, int dataset_count, int model_count) {
    const double n_datasets = static_cast<double>(dataset_count);
    const double denom = n_datasets * static_cast<double>(model_count - 1) - chi2;
    if (denom <= 0.0) throw std::invalid_argument("friedman_f: N(n-1) - chi2 must be positive");
    return (n_datasets - 1.0) * chi2 / denom;
}

double nemenyi_cd(double q_alpha, int model_count, int dataset_count) {
    if (q_alpha < 0) throw std::invalid_argument("nemenyi_cd: q_alpha must be >= 0");
    const double n = static_cast<double>(model_count);
    return q_alpha * std::sqrt(n * (n + 1.0) / (6.0 * static_cast<double>(dataset_count)));
}

std::optional<double> nemenyi_q_alpha05(int model_count) {
    if (model_count < 2 || model_count > 20) return std::nullopt;
    return kQAlpha05[model_count - 2];
}

std::vector<std::vector<SignificanceMark>> significance_table(const std::vector<double>& ranks,
                                                              double cd) {
    if (cd < 0) throw std::invalid_argument("significance_table: CD must be >= 0");
    const int n = static_cast<int>(ranks.size());
    std::vector<std::vector<SignificanceMark>> marks(
        n, std::vector<SignificanceMark>(n, SignificanceMark::kBlank));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (std::abs(ranks[i] - ranks[j]) >= cd) {
                marks[i][j] = ranks[i] < ranks[j] ? SignificanceMark::kRowBetter
                                                  : SignificanceMark::kRowWorse;
            }
        }
    }
    return marks;
}

double sign_test_threshold(int dataset_count) {
    const double n = static_cast<double>(dataset_count);
    return n / 2.0 + 1.96 * std::sqrt(n) / 2.0;
}

std::vector<std::vector<WinTieLoss>> win_tie_loss(const ResultsMatrix& m) {
    check_matrix(m);
    const int n = static_cast<int>(m.models.size());
    const int datasets = static_cast<int>(m.datasets.size());
    const double threshold = sign_test_threshold(datasets);

    std::vector<std::vector<WinTieLoss>> table(n, std::vector<WinTieLoss>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            WinTieLoss cell;
            for (int d = 0; d < datasets; ++d) {
                const double a = m.accuracy(i, d);
                const double b = m.accuracy(j, d);
                if (a > b) ++cell.wins;
                else if (a < b) ++cell.losses;
                else ++cell.ties;
            }
            // Even ties split between the sides, the odd one is dropped.
            cell.significant =
                static_cast<double>(cell.wins + cell.ties / 2) >= threshold;
            table[i][j] = cell;
        }
    }
    return table;
}

std::string render_report(const ResultsMatrix& m, const ReportOptions& options) {
    check_matrix(m);
    const int n = static_cast<int>(m.models.size());
    const int actual_datasets = static_cast<int>(m.datasets.size());
    const int stat_n = options.paper_n.value_or(actual_datasets);

    double q_alpha = 0.0;
    if (options.q_alpha) {
        q_alpha = *options.q_alpha;
    } else {
        auto bundled = nemenyi_q_alpha05(n);
        if (!bundled) {
            throw std::invalid_argument(
                "no bundled q value for n=" + std::to_string(n) +
                " (table covers 2..20 at alpha=0.05); pass q_alpha explicitly");
        }
        q_alpha = *bundled;
    }

    const std::vector<double> ranks = average_ranks(m);
    const double chi2 = friedman_chi2(ranks, stat_n);
    const double cd = nemenyi_cd(q_alpha, n, stat_n);
    const auto marks = significance_table(ranks, cd);
    const auto wtl = win_tie_loss(m);

    std::vector<double> mean_acc(n, 0.0);
    for (int i = 0; i < n; ++i) mean_acc[i] = m.accuracy.row(i).mean();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ranks[a] < ranks[b]; });

    std::ostringstream out;
    out << "# Forest comparison report\n\n";
    out << "- models: " << n << "\n";
    out << "- datasets: " << actual_datasets;
    if (options.paper_n) out << " (rank statistics computed with N = " << stat_n << ")";
    out << "\n- accuracy unit: " << options.accuracy_unit << "\n\n";

    out << "## Accuracy and average rank\n\n";
    out << "| Model | Mean accuracy | Average rank |\n";
    out << "|---|---:|---:|\n";
    for (int i : order) {
        out << "| " << m.models[i] << " | " << fmt(mean_acc[i]) << " | " << fmt(ranks[i])
            << " |\n";
    }
    out << "\n";

    out << "## Friedman test\n\n";
    out << "- chi2_F = " << fmt(chi2) << " (N = " << stat_n << ", n = " << n << ")\n";
    const double denom = static_cast<double>(stat_n) * (n - 1) - chi2;
    if (denom > 0) {
        out << "- F_F = " << fmt(friedman_f(chi2, stat_n, n)) << " with (" << (n - 1) << ", "
            << (n - 1) * (stat_n - 1) << ") degrees of freedom\n";
    } else {
        out << "- F_F undefined: N(n-1) - chi2 is not positive\n";
    }
    out << "\n";

    out << "## Nemenyi critical difference\n\n";
    out << "- q_alpha = " << fmt(q_alpha) << " (alpha = " << fmt(options.alpha, 2) << ")\n";
    out << "- CD = " << fmt(cd) << "\n";
    out << "- ranking: ";
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) out << " < ";
        out << m.models[order[i]] << " (" << fmt(ranks[order[i]], 2) << ")";
    }
    out << "\n\n";

    out << "## Pairwise significance (|rank difference| >= CD)\n\n";
    out << "|  |";
    for (int j = 0; j < n; ++j) out << " " << m.models[j] << " |";
    out << "\n|---|";
    for (int j = 0; j < n; ++j) out << "---|";
    out << "\n";
    for (int i = 0; i < n; ++i) {
        out << "| " << m.models[i] << " |";
        for (int j = 0; j < n; ++j) {
            const char* mark = "";
            if (marks[i][j] == SignificanceMark::kRowBetter) mark = "r+";
            else if (marks[i][j] == SignificanceMark::kRowWorse) mark = "r-";
            out << " " << mark << " |";
        }
        out << "\n";
    }
    out << "\nr+ marks a row model significantly better than the column model, r- worse;"
           " blank cells do not differ significantly.\n\n";

    out << "## Win-tie-loss sign test\n\n";
    out << "- significance threshold: wins + ties/2 >= " << fmt(sign_test_threshold(actual_datasets), 2)
        << " over " << actual_datasets << " datasets\n\n";
    out << "|  |";
    for (int j = 0; j < n; ++j) out << " " << m.models[j] << " |";
    out << "\n|---|";
    for (int j = 0; j < n; ++j) out << "---|";
    out << "\n";
    for (int i = 0; i < n; ++i) {
        out << "| " << m.models[i] << " |";
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                out << "  |";
                continue;
            }
            const WinTieLoss& cell = wtl[i][j];
            out << " [" << cell.wins << "," << cell.ties << "," << cell.losses << "]"
                << (cell.significant ? "*" : "") << " |";
        }
        out << "\n";
    }
    out << "\n* row model significantly better than the column model under the sign test.\n";
    return out.str();
}

}  // namespace hetforest
