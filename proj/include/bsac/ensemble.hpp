#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsac/autoencoder.hpp"
#include "bsac/matrix.hpp"
#include "bsac/metrics.hpp"
#include "bsac/preprocess.hpp"
#include "bsac/rng.hpp"
#include "bsac/threading.hpp"

namespace bsac {

struct ImbalanceInfo {
    double ratio = 0.0;          // negatives / positives
    std::size_t subset_count = 0;  // floor(ratio)
};

inline ImbalanceInfo imbalance_ratio(const Vector& labels) {
    std::size_t positives = 0, negatives = 0;
    for (double y : labels) {
        if (y == 1.0) {
            ++positives;
        } else if (y == 0.0) {
            ++negatives;
        } else {
            throw std::invalid_argument("imbalance_ratio: non-binary label");
        }
    }
    if (positives == 0 || negatives == 0) {
        throw std::invalid_argument("imbalance_ratio: both classes must be present");
    }
    if (positives > negatives) {
        throw std::invalid_argument("imbalance_ratio: majority class must be negative");
    }
    ImbalanceInfo info;
    info.ratio = static_cast<double>(negatives) / static_cast<double>(positives);
    info.subset_count = negatives / positives;  // floor for integer counts
    return info;
}

/// One balanced training subset: the full minority class plus one chunk of a
/// shuffled even partition of the majority class.
struct BalancedSubset {
    std::vector<std::size_t> minority_indices;
    std::vector<std::size_t> majority_indices;
    std::size_t subset_id = 0;

    std::vector<std::size_t> all_indices() const {
        std::vector<std::size_t> all = minority_indices;
        all.insert(all.end(), majority_indices.begin(), majority_indices.end());
        return all;
    }
};

/// Shuffles the majority indices and partitions them into floor(n/p) chunks
/// whose sizes differ by at most one; every chunk is paired with the full
/// minority set. Chunks are disjoint and jointly cover the majority class.
inline std::vector<BalancedSubset> make_balanced_subsets(const Vector& labels, Rng& rng) {
    const ImbalanceInfo info = imbalance_ratio(labels);
    std::vector<std::size_t> minority, majority;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 1.0 ? minority : majority).push_back(i);
    }
    rng.shuffle(majority);

    const std::size_t k = info.subset_count;
    const std::size_t base = majority.size() / k;
    const std::size_t remainder = majority.size() % k;

    std::vector<BalancedSubset> subsets(k);
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t take = base + (s < remainder ? 1 : 0);
        subsets[s].subset_id = s;
        subsets[s].minority_indices = minority;
        subsets[s].majority_indices.assign(majority.begin() + cursor,
                                           majority.begin() + cursor + take);
        cursor += take;
    }
    return subsets;
}

/// The deployable pool: one supervised autoencoder per balanced subset with
/// its selected gamma, plus the preprocessing that produced the features.
struct BSACModel {
    std::vector<SAModel> base_models;
    std::vector<double> gammas;
    PreprocessParams preprocess;

    struct Metadata {
        std::uint64_t seed = 0;
        std::string dataset;
        int fold = -1;
    } metadata;

    std::size_t pool_size() const { return base_models.size(); }
};

struct GammaSweepRow {
    std::size_t subset_id = 0;
    double gamma = 0.0;
    double validation_f1 = 0.0;
};

struct PoolTrainResult {
    BSACModel model;
    std::vector<GammaSweepRow> sweep;  // subset-major, grid order
};

/// Trains one candidate SA per (subset, gamma) pair and keeps, per subset, the
/// gamma with the best validation F1 (ties resolved toward larger gamma).
/// Candidates run on independent derived streams, so the result is identical
/// under any parallel schedule.
inline PoolTrainResult train_bsac_with_sweep(const Dataset& train, const Dataset& validation,
                                             const SAConfig& base_config,
                                             const std::vector<double>& gamma_grid, Rng& rng) {
    if (gamma_grid.empty()) {
        throw std::invalid_argument("train_bsac: empty gamma grid");
    }
    for (double g : gamma_grid) {
        if (g < 0.0 || g > 1.0) {
            throw std::invalid_argument("train_bsac: gamma outside [0,1] in grid");
        }
    }
    if (validation.features.cols() != train.features.cols()) {
        throw std::invalid_argument("train_bsac: validation width differs from train width");
    }

    const std::vector<BalancedSubset> subsets = make_balanced_subsets(train.labels, rng);
    const std::uint64_t pool_seed = rng.next_u64();
    const std::size_t k = subsets.size();
    const std::size_t grid = gamma_grid.size();

    struct Candidate {
        std::unique_ptr<SAModel> model;
        double f1 = 0.0;
    };
    std::vector<Candidate> candidates(k * grid);

    run_jobs(k * grid, [&](std::size_t job) {
        const std::size_t s = job / grid;
        const std::size_t gi = job % grid;
        const std::vector<std::size_t> rows = subsets[s].all_indices();
        const Matrix x = gather_rows(train.features, rows);
        const Vector y = gather(train.labels, rows);

        SAConfig config = base_config;
        config.gamma = gamma_grid[gi];
        config.seed = derive_stream(pool_seed, subsets[s].subset_id, gi);

        auto model = std::make_unique<SAModel>(sa_train(config, x, y));
        const SAPrediction pred = sa_predict(*model, validation.features);
        candidates[job].f1 = metrics(confusion(validation.labels, pred.labels)).f1;
        candidates[job].model = std::move(model);
    });

    PoolTrainResult result;
    result.model.preprocess = {};
    result.model.metadata.seed = pool_seed;
    for (std::size_t s = 0; s < k; ++s) {
        std::size_t best = grid;  // sentinel
        for (std::size_t gi = 0; gi < grid; ++gi) {
            result.sweep.push_back({subsets[s].subset_id, gamma_grid[gi],
                                    candidates[s * grid + gi].f1});
            if (best == grid) {
                best = gi;
                continue;
            }
            const Candidate& cur = candidates[s * grid + gi];
            const Candidate& champ = candidates[s * grid + best];
            if (cur.f1 > champ.f1 ||
                (cur.f1 == champ.f1 && gamma_grid[gi] > gamma_grid[best])) {
                best = gi;
            }
        }
        result.model.base_models.push_back(std::move(*candidates[s * grid + best].model));
        result.model.gammas.push_back(gamma_grid[best]);
        for (std::size_t gi = 0; gi < grid; ++gi) {
            candidates[s * grid + gi].model.reset();  // losers are discarded
        }
    }
    return result;
}

inline BSACModel train_bsac(const Dataset& train, const Dataset& validation,
                            const SAConfig& base_config, const std::vector<double>& gamma_grid,
                            Rng& rng) {
    return train_bsac_with_sweep(train, validation, base_config, gamma_grid, rng).model;
}

struct BSACPrediction {
    Vector labels;
    Vector positive_vote_fraction;
};

/// Positive iff at least half the pool votes positive.
inline double vote_label(std::size_t positive_votes, std::size_t pool_size) {
    return 2 * positive_votes >= pool_size ? 1.0 : 0.0;
}

/// Hard-label majority vote over the pool, ties to the positive class.
inline BSACPrediction bsac_predict(const BSACModel& model, const Matrix& features) {
    if (model.base_models.empty()) {
        throw std::invalid_argument("bsac_predict: empty pool");
    }
    const std::size_t n = features.rows();
    std::vector<std::size_t> positive_votes(n, 0);
    for (const SAModel& base : model.base_models) {
        const SAPrediction pred = sa_predict(base, features);
        for (std::size_t i = 0; i < n; ++i) {
            if (pred.labels[i] == 1.0) ++positive_votes[i];
        }
    }
    BSACPrediction out;
    out.labels.resize(n);
    out.positive_vote_fraction.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = vote_label(positive_votes[i], model.base_models.size());
        out.positive_vote_fraction[i] = static_cast<double>(positive_votes[i]) /
                                        static_cast<double>(model.base_models.size());
    }
    return out;
}

}  // namespace bsac
