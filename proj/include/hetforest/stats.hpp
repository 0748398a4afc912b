#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace hetforest {

/// models x datasets accuracy table feeding the rank engine.
struct ResultsMatrix {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    Eigen::MatrixXd accuracy;  // models.size() x datasets.size()
};

/// Per-dataset Friedman ranks (1 = best accuracy, ties averaged),
/// averaged over datasets.
std::vector<double> average_ranks(const ResultsMatrix& m);

/// chi^2_F = 12N / (n(n+1)) * [sum R_j^2 - n(n+1)^2 / 4].
double friedman_chi2(const std::vector<double>& ranks, int dataset_count);

/// F_F = (N-1) chi^2 / (N(n-1) - chi^2); throws when the denominator is
/// not positive.
double friedman_f(double chi2, int dataset_count, int model_count);

/// CD = q_alpha * sqrt(n(n+1) / (6N)).
double nemenyi_cd(double q_alpha, int model_count, int dataset_count);

/// Studentized-range constant for the Nemenyi test at alpha = 0.05,
/// bundled for n in [2, 20].
std::optional<double> nemenyi_q_alpha05(int model_count);

enum class SignificanceMark { kBlank, kRowBetter, kRowWorse };

/// Pairwise marks: models differ iff |R_i - R_j| >= CD; the lower-rank
/// model of a significant pair is the better one.
std::vector<std::vector<SignificanceMark>> significance_table(const std::vector<double>& ranks,
                                                              double cd);

struct WinTieLoss {
    int wins = 0;
    int ties = 0;
    int losses = 0;
    bool significant = false;  // wins + ties/2 >= N/2 + 1.96 sqrt(N)/2
};

/// Sign-test threshold N/2 + 1.96 sqrt(N) / 2.
double sign_test_threshold(int dataset_count);

/// n x n table of ordered-pair win/tie/loss counts over datasets;
/// ties split evenly (odd one ignored) before the significance test.
std::vector<std::vector<WinTieLoss>> win_tie_loss(const ResultsMatrix& m);

struct ReportOptions {
    double alpha = 0.05;
    std::optional<double> q_alpha;  // default: bundled table lookup
    std::optional<int> paper_n;     // overrides N in the rank statistics
    std::string accuracy_unit = "fraction";  // "fraction" or "percent"
};

/// Markdown report: accuracy/rank summary, Friedman and Nemenyi
/// statistics, pairwise significance marks and win-tie-loss counts.
std::string render_report(const ResultsMatrix& m, const ReportOptions& options);

}  // namespace hetforest
