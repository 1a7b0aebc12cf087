#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "bgadl/nets.hpp"
#include "bgadl/rng.hpp"

namespace bgadl {

struct ScoreStats {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    double iqr = 0.0;
};

struct AcquisitionReport {
    std::vector<std::size_t> subsample_indices;
    std::vector<double> scores; // aligned with subsample_indices
    std::vector<std::size_t> selected_indices;
    ScoreStats stats;
};

// −Σ p_c ln p_c with 0·ln 0 := 0. Requires p ≥ 0 and Σp = 1 within 1e-6.
double shannon_entropy(const std::vector<double>& p);
double shannon_entropy(const double* p, std::size_t n);

// H(mean_t p̂ᵗ) − mean_t H(p̂ᵗ), the sample-mean BALD estimate.
double bald_score(const MCSamples& mc);

// min(m, n) distinct indices drawn uniformly without replacement.
std::vector<std::size_t> subsample_pool(const std::vector<std::size_t>& pool_indices, std::size_t m,
                                        RngStream& stream);

// BALD score per index; item streams are derived from (seed, "mc", iteration,
// pool index), so scoring is order- and worker-count-independent.
std::vector<double> score_pool(const ClassifierParams& classifier,
                               const std::function<const Tensor&(std::size_t)>& item,
                               const std::vector<std::size_t>& indices, int passes, std::uint64_t seed,
                               long iteration, int workers);

// k highest-scoring indices, ties broken by lower pool index, ordered by
// score descending. Returns all when k exceeds the candidate count.
std::vector<std::size_t> select_top_k(const std::vector<double>& scores,
                                      const std::vector<std::size_t>& indices, std::size_t k);

ScoreStats score_stats(std::vector<double> scores);

struct Prop1Result {
    double a_star = 0.0;
    double a_prime = 0.0;
    double gap = 0.0;
};

// Evaluates the acquisition function at x_star and x_prime with identical
// dropout masks per pass (common random numbers), so the gap reflects the
// Taylor-level difference rather than MC noise.
Prop1Result proposition1_gap(const ClassifierParams& classifier, const Tensor& x_star, const Tensor& x_prime,
                             int passes, std::uint64_t shared_key);

} // namespace bgadl
