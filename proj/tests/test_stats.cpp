#include <doctest.h>

#include <numeric>

#include "hetforest/random.hpp"
#include "hetforest/stats.hpp"

using namespace hetforest;

namespace {

// Table 2 ranks in model order: het-draf, het-raf, mpraf-t, mpraf-p,
// draf, raf, raf-lda, raf-pca, mpraf-n.
const std::vector<double> kPaperRanks{3.96, 4.16, 5.06, 4.91, 5.07, 5.61, 4.78, 5.71, 5.75};

ResultsMatrix small_matrix(const Eigen::MatrixXd& accuracy) {
    ResultsMatrix m;
    for (int i = 0; i < accuracy.rows(); ++i) m.models.push_back("m" + std::to_string(i));
    for (int j = 0; j < accuracy.cols(); ++j) m.datasets.push_back("d" + std::to_string(j));
    m.accuracy = accuracy;
    return m;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("average_ranks with a dominant model") {
    Eigen::MatrixXd acc(2, 3);
    acc << 0.9, 0.8, 0.95, 0.7, 0.6, 0.9;
    auto ranks = average_ranks(small_matrix(acc));
    CHECK(ranks[0] == doctest::Approx(1.0));
    CHECK(ranks[1] == doctest::Approx(2.0));
}

TEST_CASE("average_ranks averages full ties") {
    Eigen::MatrixXd acc(3, 1);
    acc << 0.5, 0.5, 0.5;
    auto ranks = average_ranks(small_matrix(acc));
    for (double r : ranks) CHECK(r == doctest::Approx(2.0));
}

TEST_CASE("average_ranks matches a sort-based recomputation") {
    SplitMix64 rng(300);
    Eigen::MatrixXd acc(3, 4);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) acc(i, j) = rng.next_unit();
    }
    auto ranks = average_ranks(small_matrix(acc));

    std::vector<double> expected(3, 0.0);
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 3; ++i) {
            double rank = 1.0;
            for (int other = 0; other < 3; ++other) {
                if (acc(other, j) > acc(i, j)) rank += 1.0;
                else if (other != i && acc(other, j) == acc(i, j)) rank += 0.5;
            }
            expected[i] += rank;
        }
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(ranks[i] == doctest::Approx(expected[i] / 4.0));
    }
    // Per-dataset ranks sum to n(n+1)/2, so averages sum to it too.
    CHECK(std::accumulate(ranks.begin(), ranks.end(), 0.0) == doctest::Approx(6.0));
}

TEST_CASE("friedman_chi2 null case and hand value") {
    CHECK(friedman_chi2({1.5, 1.5}, 10) == doctest::Approx(0.0));
    CHECK(friedman_chi2({1.0, 2.0}, 10) == doctest::Approx(10.0));
}

TEST_CASE("friedman_chi2 reproduces the published statistic") {
    CHECK(friedman_chi2(kPaperRanks, 106) == doctest::Approx(47.9247).epsilon(0.2 / 47.9));
    // Permuting the ranks changes nothing.
    std::vector<double> shuffled = kPaperRanks;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(friedman_chi2(shuffled, 106) == doctest::Approx(friedman_chi2(kPaperRanks, 106)));
}

TEST_CASE("friedman_f values and guard") {
    CHECK(friedman_f(0.0, 10, 3) == doctest::Approx(0.0));
    CHECK(friedman_f(47.9247, 106, 9) == doctest::Approx(6.2895).epsilon(0.001));
    CHECK_THROWS(friedman_f(10.0, 10, 2));  // denominator zero
}

TEST_CASE("nemenyi_cd values") {
    CHECK(nemenyi_cd(0.0, 9, 106) == doctest::Approx(0.0));
    CHECK(nemenyi_cd(3.1020, 9, 106) == doctest::Approx(1.17).epsilon(0.005 / 1.17));
    CHECK(nemenyi_cd(1.0, 2, 6) == doctest::Approx(std::sqrt(6.0 / 36.0)));
}

TEST_CASE("bundled q table anchors at the published n=9 entry") {
    CHECK(nemenyi_q_alpha05(9) == doctest::Approx(3.1020));
    CHECK(nemenyi_q_alpha05(2) == doctest::Approx(1.96).epsilon(1e-3));
    CHECK(!nemenyi_q_alpha05(21).has_value());
    CHECK(!nemenyi_q_alpha05(1).has_value());
}

TEST_CASE("significance_table marks pairs beyond the critical difference") {
    auto marks = significance_table({3.96, 5.61}, 1.17);
    CHECK(marks[0][1] == SignificanceMark::kRowBetter);
    CHECK(marks[1][0] == SignificanceMark::kRowWorse);

    auto blank = significance_table({5.06, 4.78}, 1.17);
    CHECK(blank[0][1] == SignificanceMark::kBlank);
    CHECK(blank[1][0] == SignificanceMark::kBlank);

    auto same = significance_table({2.0, 2.0}, 0.5);
    CHECK(same[0][1] == SignificanceMark::kBlank);
}

TEST_CASE("sign test threshold and the published cases") {
    CHECK(sign_test_threshold(121) == doctest::Approx(71.28).epsilon(0.01 / 71.28));
    // Het-DRaF vs RaF-PCA: [67, 16, 23] -> 67 + 8 = 75 >= 71.28.
    CHECK(67 + 16 / 2 >= sign_test_threshold(121) - 1e-12);
    // Het-DRaF vs Het-RaF: [50, 14, 42] -> 50 + 7 = 57 < 71.28.
    CHECK(50 + 14 / 2 < sign_test_threshold(121));
}

TEST_CASE("win_tie_loss counts, conservation, and mirroring") {
    SplitMix64 rng(301);
    Eigen::MatrixXd acc(3, 15);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 15; ++j) acc(i, j) = std::round(rng.next_unit() * 4) / 4.0;
    }
    auto table = win_tie_loss(small_matrix(acc));
    const int n_datasets = 15;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            const auto& cell = table[i][j];
            REQUIRE(cell.wins + cell.ties + cell.losses == n_datasets);
            REQUIRE(cell.wins == table[j][i].losses);
            REQUIRE(cell.ties == table[j][i].ties);
        }
    }
}

TEST_CASE("win_tie_loss flags a dominant model") {
    Eigen::MatrixXd acc(2, 121);
    for (int j = 0; j < 121; ++j) {
        acc(0, j) = 0.9;
        acc(1, j) = 0.8;
    }
    auto table = win_tie_loss(small_matrix(acc));
    CHECK(table[0][1].wins == 121);
    CHECK(table[0][1].significant);
    CHECK_FALSE(table[1][0].significant);
}

TEST_CASE("render_report is deterministic and structured") {
    SplitMix64 rng(302);
    Eigen::MatrixXd acc(3, 8);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 8; ++j) acc(i, j) = 0.5 + 0.4 * rng.next_unit();
    }
    ResultsMatrix m = small_matrix(acc);
    ReportOptions options;
    const std::string a = render_report(m, options);
    const std::string b = render_report(m, options);
    CHECK(a == b);
    CHECK(a.find("## Friedman test") != std::string::npos);
    CHECK(a.find("## Nemenyi critical difference") != std::string::npos);
    CHECK(a.find("## Win-tie-loss sign test") != std::string::npos);
    CHECK(a.find("ranking:") != std::string::npos);
}

}  // TEST_SUITE
