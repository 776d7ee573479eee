#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "bsac/ensemble.hpp"
#include "test_util.hpp"

using namespace bsac;

namespace {

Vector labels_with_counts(std::size_t positives, std::size_t negatives) {
    Vector labels(positives + negatives, 0.0);
    for (std::size_t i = 0; i < positives; ++i) labels[i] = 1.0;
    return labels;
}

SAConfig tiny_config(std::size_t dims, std::uint64_t seed) {
    SAConfig config;
    config.layer_sizes = {dims, 3, dims};
    config.gamma = 0.5;
    config.epochs = 8;
    config.batch_size = 64;
    config.learning_rate = 0.01;
    config.seed = seed;
    return config;
}

}  // namespace

TEST(ImbalanceRatioTest, BalancedInput) {
    const ImbalanceInfo info = imbalance_ratio(labels_with_counts(10, 10));
    EXPECT_DOUBLE_EQ(info.ratio, 1.0);
    EXPECT_EQ(info.subset_count, 1u);
}

TEST(ImbalanceRatioTest, TaiwanLikeRatio) {
    // 22.12% positives reproduces the published 3.52 ratio
    const ImbalanceInfo info = imbalance_ratio(labels_with_counts(2212, 7788));
    EXPECT_NEAR(info.ratio, 3.52, 0.005);
    EXPECT_EQ(info.subset_count, 3u);
}

TEST(ImbalanceRatioTest, ErrorContracts) {
    EXPECT_THROW(imbalance_ratio(labels_with_counts(5, 0)), std::invalid_argument);
    EXPECT_THROW(imbalance_ratio(labels_with_counts(0, 5)), std::invalid_argument);
    EXPECT_THROW(imbalance_ratio(labels_with_counts(5, 4)), std::invalid_argument);
    EXPECT_THROW(imbalance_ratio({0.5, 1.0}), std::invalid_argument);
}

TEST(BalancedSubsetsTest, ExactDivision) {
    Rng rng(8);
    const auto subsets = make_balanced_subsets(labels_with_counts(10, 30), rng);
    ASSERT_EQ(subsets.size(), 3u);
    for (const auto& s : subsets) {
        EXPECT_EQ(s.minority_indices.size(), 10u);
        EXPECT_EQ(s.majority_indices.size(), 10u);
        EXPECT_EQ(s.all_indices().size(), 20u);
    }
}

TEST(BalancedSubsetsTest, RemainderSpreadAcrossChunks) {
    Rng rng(9);
    const auto subsets = make_balanced_subsets(labels_with_counts(10, 35), rng);
    ASSERT_EQ(subsets.size(), 3u);
    std::multiset<std::size_t> sizes;
    std::set<std::size_t> all_majority;
    for (const auto& s : subsets) {
        sizes.insert(s.majority_indices.size());
        all_majority.insert(s.majority_indices.begin(), s.majority_indices.end());
    }
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{11, 12, 12}));
    EXPECT_EQ(all_majority.size(), 35u);  // disjoint and exhaustive
}

TEST(BalancedSubsetsTest, RatioBelowOneIsAnError) {
    Rng rng(10);
    EXPECT_THROW(make_balanced_subsets(labels_with_counts(5, 4), rng), std::invalid_argument);
}

TEST(BalancedSubsetsTest, PartitionInvariantsOverRandomSizes) {
    Rng rng(2718);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 1 + rng.next_below(40);
        const std::size_t ratio = 1 + rng.next_below(20);
        const std::size_t n = p * ratio + rng.next_below(p);  // floor(n/p) == ratio
        const Vector labels = labels_with_counts(p, n);

        Rng subset_rng(trial);
        const auto subsets = make_balanced_subsets(labels, subset_rng);
        const std::size_t k = n / p;
        ASSERT_EQ(subsets.size(), k);

        std::set<std::size_t> seen;
        std::size_t min_chunk = n, max_chunk = 0;
        for (const auto& s : subsets) {
            ASSERT_EQ(s.minority_indices.size(), p);
            for (std::size_t idx : s.majority_indices) {
                ASSERT_EQ(labels[idx], 0.0);
                ASSERT_TRUE(seen.insert(idx).second) << "majority index reused across subsets";
            }
            min_chunk = std::min(min_chunk, s.majority_indices.size());
            max_chunk = std::max(max_chunk, s.majority_indices.size());
        }
        ASSERT_EQ(seen.size(), n) << "majority partition is not exhaustive";
        ASSERT_LE(max_chunk - min_chunk, 1u);
    }
}

TEST(BalancedSubsetsTest, DeterministicForSeed) {
    const Vector labels = labels_with_counts(20, 65);
    Rng a(77), b(77);
    const auto sa = make_balanced_subsets(labels, a);
    const auto sb = make_balanced_subsets(labels, b);
    ASSERT_EQ(sa.size(), sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) {
        EXPECT_EQ(sa[i].majority_indices, sb[i].majority_indices);
    }
}

TEST(VoteTest, StrictMajorityAndTieRule) {
    EXPECT_EQ(vote_label(2, 3), 1.0);  // votes [1,0,1]
    EXPECT_EQ(vote_label(1, 3), 0.0);
    EXPECT_EQ(vote_label(1, 2), 1.0);  // tie -> positive
    EXPECT_EQ(vote_label(0, 2), 0.0);
}

TEST(VoteTest, MatchesBruteForceCounting) {
    Rng rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t pool = 1 + rng.next_below(9);
        std::size_t positives = 0;
        for (std::size_t i = 0; i < pool; ++i) positives += rng.next_below(2);
        // brute force: count both sides explicitly
        const std::size_t negatives = pool - positives;
        const double expected = positives >= negatives ? 1.0 : 0.0;
        ASSERT_EQ(vote_label(positives, pool), expected);
    }
}

TEST(BsacPredictTest, AgreesWithPerModelBruteForce) {
    const Dataset train = test::make_blob_dataset(24, 72, 4, 1.0, 404);
    const Dataset val = test::make_blob_dataset(8, 24, 4, 1.0, 405);
    Rng rng(11);
    const BSACModel model = train_bsac(train, val, tiny_config(4, 1), {0.3, 0.7}, rng);
    ASSERT_EQ(model.pool_size(), 3u);

    Matrix probe(1000, 4);
    Rng probe_rng(12);
    for (double& v : probe.values()) v = probe_rng.next_double();
    const BSACPrediction pred = bsac_predict(model, probe);

    for (std::size_t row = 0; row < probe.rows(); ++row) {
        std::size_t votes = 0;
        for (const SAModel& base : model.base_models) {
            Matrix one(1, 4);
            for (std::size_t c = 0; c < 4; ++c) one(0, c) = probe(row, c);
            votes += sa_predict(base, one).labels[0] == 1.0 ? 1 : 0;
        }
        const double expected = 2 * votes >= model.pool_size() ? 1.0 : 0.0;
        ASSERT_EQ(pred.labels[row], expected) << "row " << row;
        ASSERT_DOUBLE_EQ(pred.positive_vote_fraction[row],
                         static_cast<double>(votes) / static_cast<double>(model.pool_size()));
    }
}

TEST(BsacPredictTest, PoolOrderDoesNotChangeVotes) {
    const Dataset train = test::make_blob_dataset(20, 44, 3, 1.0, 500);
    const Dataset val = test::make_blob_dataset(10, 22, 3, 1.0, 501);
    Rng rng(13);
    BSACModel model = train_bsac(train, val, tiny_config(3, 2), {0.5}, rng);
    ASSERT_EQ(model.pool_size(), 2u);

    Matrix probe(64, 3);
    Rng probe_rng(14);
    for (double& v : probe.values()) v = probe_rng.next_double();
    const BSACPrediction before = bsac_predict(model, probe);

    std::reverse(model.base_models.begin(), model.base_models.end());
    const BSACPrediction after = bsac_predict(model, probe);
    EXPECT_EQ(before.labels, after.labels);
    EXPECT_EQ(before.positive_vote_fraction, after.positive_vote_fraction);
}

TEST(BsacPredictTest, FlippingAVoteUpNeverFlipsEnsembleDown) {
    // monotone property of the counting rule itself
    for (std::size_t pool = 1; pool <= 9; ++pool) {
        for (std::size_t votes = 0; votes < pool; ++votes) {
            ASSERT_GE(vote_label(votes + 1, pool), vote_label(votes, pool));
        }
    }
}

TEST(BsacPredictTest, EmptyPoolThrows) {
    BSACModel model;
    EXPECT_THROW(bsac_predict(model, Matrix(1, 3)), std::invalid_argument);
}

TEST(TrainBsacTest, PoolSizeIsFlooredRatio) {
    const Dataset train = test::make_blob_dataset(20, 70, 3, 1.0, 600);  // IR 3.5
    const Dataset val = test::make_blob_dataset(10, 35, 3, 1.0, 601);
    Rng rng(15);
    const BSACModel model = train_bsac(train, val, tiny_config(3, 3), {0.5}, rng);
    EXPECT_EQ(model.pool_size(), 3u);
    EXPECT_EQ(model.gammas.size(), 3u);
}

TEST(TrainBsacTest, SingleElementGridSelectsThatGamma) {
    const Dataset train = test::make_blob_dataset(16, 36, 3, 1.0, 700);
    const Dataset val = test::make_blob_dataset(8, 18, 3, 1.0, 701);
    Rng rng(16);
    const BSACModel model = train_bsac(train, val, tiny_config(3, 4), {0.35}, rng);
    for (double gamma : model.gammas) {
        EXPECT_DOUBLE_EQ(gamma, 0.35);
    }
}

TEST(TrainBsacTest, SweepHasGridTimesPoolRows) {
    const Dataset train = test::make_blob_dataset(16, 52, 3, 1.0, 800);  // IR 3.25 -> pool 3
    const Dataset val = test::make_blob_dataset(8, 26, 3, 1.0, 801);
    Rng rng(17);
    const std::vector<double> grid{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
    const PoolTrainResult result = train_bsac_with_sweep(train, val, tiny_config(3, 5), grid, rng);
    EXPECT_EQ(result.sweep.size(), 27u);  // 9 candidate trainings per base classifier
    for (const GammaSweepRow& row : result.sweep) {
        EXPECT_GE(row.validation_f1, 0.0);
        EXPECT_LE(row.validation_f1, 1.0);
    }
}

TEST(TrainBsacTest, TiesBreakTowardLargerGamma) {
    const Dataset train = test::make_blob_dataset(16, 36, 3, 1.0, 900);
    const Dataset val = test::make_blob_dataset(8, 18, 3, 1.0, 901);
    Rng rng(18);
    // duplicated gamma value: identical derived seeds would differ by index,
    // but an exactly tied F1 must resolve to the larger gamma of the pair
    const PoolTrainResult result =
        train_bsac_with_sweep(train, val, tiny_config(3, 6), {0.2, 0.8}, rng);
    for (std::size_t s = 0; s < result.model.pool_size(); ++s) {
        double best_f1 = -1.0, best_gamma = -1.0;
        for (const GammaSweepRow& row : result.sweep) {
            if (row.subset_id != s) continue;
            if (row.validation_f1 > best_f1 ||
                (row.validation_f1 == best_f1 && row.gamma > best_gamma)) {
                best_f1 = row.validation_f1;
                best_gamma = row.gamma;
            }
        }
        EXPECT_DOUBLE_EQ(result.model.gammas[s], best_gamma);
    }
}

TEST(TrainBsacTest, DeterministicForSeed) {
    const Dataset train = test::make_blob_dataset(16, 40, 3, 1.0, 1000);
    const Dataset val = test::make_blob_dataset(8, 20, 3, 1.0, 1001);
    auto run = [&] {
        Rng rng(19);
        return train_bsac_with_sweep(train, val, tiny_config(3, 7), {0.3, 0.6}, rng);
    };
    const PoolTrainResult a = run();
    const PoolTrainResult b = run();
    ASSERT_EQ(a.model.gammas, b.model.gammas);
    ASSERT_EQ(a.sweep.size(), b.sweep.size());
    for (std::size_t i = 0; i < a.sweep.size(); ++i) {
        ASSERT_EQ(a.sweep[i].validation_f1, b.sweep[i].validation_f1);
    }
    Matrix probe(32, 3);
    Rng probe_rng(20);
    for (double& v : probe.values()) v = probe_rng.next_double();
    EXPECT_EQ(bsac_predict(a.model, probe).labels, bsac_predict(b.model, probe).labels);
}

TEST(TrainBsacTest, ParallelWorkersMatchSequentialRun) {
    const Dataset train = test::make_blob_dataset(20, 60, 3, 1.0, 1200);
    const Dataset val = test::make_blob_dataset(10, 30, 3, 1.0, 1201);
    auto run = [&] {
        Rng rng(23);
        return train_bsac_with_sweep(train, val, tiny_config(3, 9), {0.2, 0.5, 0.8}, rng);
    };
    setenv("BSAC_THREADS", "1", 1);
    const PoolTrainResult sequential = run();
    setenv("BSAC_THREADS", "4", 1);
    const PoolTrainResult parallel = run();
    unsetenv("BSAC_THREADS");

    ASSERT_EQ(sequential.model.gammas, parallel.model.gammas);
    for (std::size_t i = 0; i < sequential.sweep.size(); ++i) {
        ASSERT_EQ(sequential.sweep[i].validation_f1, parallel.sweep[i].validation_f1);
    }
    Matrix probe(64, 3);
    Rng probe_rng(24);
    for (double& v : probe.values()) v = probe_rng.next_double();
    EXPECT_EQ(bsac_predict(sequential.model, probe).labels,
              bsac_predict(parallel.model, probe).labels);
    EXPECT_EQ(bsac_predict(sequential.model, probe).positive_vote_fraction,
              bsac_predict(parallel.model, probe).positive_vote_fraction);
}

TEST(TrainBsacTest, EmptyGridThrows) {
    const Dataset train = test::make_blob_dataset(8, 16, 3, 1.0, 1100);
    Rng rng(21);
    EXPECT_THROW(train_bsac(train, train, tiny_config(3, 8), {}, rng), std::invalid_argument);
    EXPECT_THROW(train_bsac(train, train, tiny_config(3, 8), {1.5}, rng), std::invalid_argument);
}
