#include "bgadl/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace bgadl {

double shannon_entropy(const double* p, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] < 0.0) throw std::invalid_argument("shannon_entropy: negative component");
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("shannon_entropy: probabilities must sum to 1");
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h;
}

double shannon_entropy(const std::vector<double>& p) { return shannon_entropy(p.data(), p.size()); }

namespace {

// shared by bald_score and the batched scorer so both produce identical bits
double bald_from_accumulators(const double* prob_sum, double entropy_sum, std::size_t classes, int passes) {
    std::vector<double> mean(classes);
    const double inv_t = 1.0 / static_cast<double>(passes);
    for (std::size_t c = 0; c < classes; ++c) mean[c] = prob_sum[c] * inv_t;
    return shannon_entropy(mean) - entropy_sum * inv_t;
}

} // namespace

double bald_score(const MCSamples& mc) {
    const std::size_t t = mc.passes(), c = mc.classes();
    if (t < 1) throw std::invalid_argument("bald_score: needs at least one pass");
    std::vector<double> prob_sum(c, 0.0);
    double entropy_sum = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        const double* row = &mc.probs.data[i * c];
        for (std::size_t j = 0; j < c; ++j) prob_sum[j] += row[j];
        entropy_sum += shannon_entropy(row, c);
    }
    return bald_from_accumulators(prob_sum.data(), entropy_sum, c, static_cast<int>(t));
}

std::vector<std::size_t> subsample_pool(const std::vector<std::size_t>& pool_indices, std::size_t m,
                                        RngStream& stream) {
    if (pool_indices.empty()) throw std::invalid_argument("subsample_pool: empty pool");
    if (m < 1) throw std::invalid_argument("subsample_pool: m must be >= 1");
    std::vector<std::size_t> idx = pool_indices;
    const std::size_t take = std::min(m, idx.size());
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + static_cast<std::size_t>(stream.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    return idx;
}

namespace {

// Scores a contiguous slice of `indices`, writing into scores[slice]. Items
// are processed in batches; row r of each batch draws its per-pass masks from
// derive_key(named_key(seed,"mc",iteration,index), pass), which makes the
// result identical to a per-item mc_predict run.
void score_slice(const ClassifierParams& p, const std::function<const Tensor&(std::size_t)>& item,
                 const std::vector<std::size_t>& indices, std::size_t begin, std::size_t end, int passes,
                 std::uint64_t seed, long iteration, std::vector<double>& scores) {
    constexpr std::size_t kBatch = 64;
    const std::size_t d = p.input_dim();
    const std::size_t classes = static_cast<std::size_t>(p.class_count);
    for (std::size_t at = begin; at < end; at += kBatch) {
        const std::size_t bsz = std::min(kBatch, end - at);
        Tensor x({bsz, d});
        std::vector<std::uint64_t> item_keys(bsz);
        for (std::size_t r = 0; r < bsz; ++r) {
            const Tensor& row = item(indices[at + r]);
            if (row.size() != d) throw std::invalid_argument("score_pool: item dimension mismatch");
            std::copy(row.data.begin(), row.data.end(), x.data.begin() + r * d);
            item_keys[r] = named_key(seed, "mc", static_cast<std::uint64_t>(iteration), indices[at + r]);
        }
        std::vector<double> prob_sum(bsz * classes, 0.0);
        std::vector<double> entropy_sum(bsz, 0.0);
        std::vector<std::uint64_t> pass_keys(bsz);
        for (int t = 0; t < passes; ++t) {
            for (std::size_t r = 0; r < bsz; ++r)
                pass_keys[r] = derive_key(item_keys[r], static_cast<std::uint64_t>(t));
            Tensor logits = classifier_logits_rowstreams(p, x, DropoutMode::McSample, pass_keys);
            Tensor probs = softmax_rows(logits);
            for (std::size_t r = 0; r < bsz; ++r) {
                const double* row = &probs.data[r * classes];
                for (std::size_t j = 0; j < classes; ++j) prob_sum[r * classes + j] += row[j];
                entropy_sum[r] += shannon_entropy(row, classes);
            }
        }
        for (std::size_t r = 0; r < bsz; ++r)
            scores[at + r] = bald_from_accumulators(&prob_sum[r * classes], entropy_sum[r], classes, passes);
    }
}

} // namespace

std::vector<double> score_pool(const ClassifierParams& classifier,
                               const std::function<const Tensor&(std::size_t)>& item,
                               const std::vector<std::size_t>& indices, int passes, std::uint64_t seed,
                               long iteration, int workers) {
    if (passes < 1) throw std::invalid_argument("score_pool: passes must be >= 1");
    std::vector<double> scores(indices.size(), 0.0);
    if (indices.empty()) return scores;
    const std::size_t n = indices.size();
    const std::size_t nworkers = std::min<std::size_t>(std::max(workers, 1), n);
    if (nworkers <= 1) {
        score_slice(classifier, item, indices, 0, n, passes, seed, iteration, scores);
        return scores;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(nworkers);
    const std::size_t chunk = (n + nworkers - 1) / nworkers;
    for (std::size_t w = 0; w < nworkers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, w, begin, end] {
            try {
                score_slice(classifier, item, indices, begin, end, passes, seed, iteration, scores);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return scores;
}

std::vector<std::size_t> select_top_k(const std::vector<double>& scores,
                                      const std::vector<std::size_t>& indices, std::size_t k) {
    if (scores.empty()) throw std::invalid_argument("select_top_k: empty scores");
    if (scores.size() != indices.size()) throw std::invalid_argument("select_top_k: score/index mismatch");
    if (k < 1) throw std::invalid_argument("select_top_k: k must be >= 1");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return indices[a] < indices[b];
    });
    const std::size_t take = std::min(k, order.size());
    std::vector<std::size_t> out(take);
    for (std::size_t i = 0; i < take; ++i) out[i] = indices[order[i]];
    return out;
}

namespace {

double quantile_type7(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

ScoreStats score_stats(std::vector<double> scores) {
    ScoreStats s;
    if (scores.empty()) return s;
    std::sort(scores.begin(), scores.end());
    s.min = scores.front();
    s.max = scores.back();
    s.median = quantile_type7(scores, 0.5);
    s.iqr = quantile_type7(scores, 0.75) - quantile_type7(scores, 0.25);
    return s;
}

Prop1Result proposition1_gap(const ClassifierParams& classifier, const Tensor& x_star, const Tensor& x_prime,
                             int passes, std::uint64_t shared_key) {
    require_same_shape(x_star, x_prime, "proposition1_gap");
    if (passes < 1) throw std::invalid_argument("proposition1_gap: passes must be >= 1");
    const std::size_t d = classifier.input_dim();
    if (x_star.size() != d) throw std::invalid_argument("proposition1_gap: dimension mismatch");
    const std::size_t classes = static_cast<std::size_t>(classifier.class_count);

    Tensor both({2, d});
    std::copy(x_star.data.begin(), x_star.data.end(), both.data.begin());
    std::copy(x_prime.data.begin(), x_prime.data.end(), both.data.begin() + d);

    std::vector<double> prob_sum(2 * classes, 0.0);
    double entropy_sum[2] = {0.0, 0.0};
    for (int t = 0; t < passes; ++t) {
        RngStream mask_stream(derive_key(shared_key, static_cast<std::uint64_t>(t)));
        std::vector<Tensor> masks = draw_shared_dropout_masks(classifier, mask_stream);
        Tensor logits = classifier_logits_shared_masks(classifier, both, masks);
        Tensor probs = softmax_rows(logits);
        for (std::size_t r = 0; r < 2; ++r) {
            const double* row = &probs.data[r * classes];
            for (std::size_t j = 0; j < classes; ++j) prob_sum[r * classes + j] += row[j];
            entropy_sum[r] += shannon_entropy(row, classes);
        }
    }
    Prop1Result out;
    out.a_star = bald_from_accumulators(&prob_sum[0], entropy_sum[0], classes, passes);
    out.a_prime = bald_from_accumulators(&prob_sum[classes], entropy_sum[1], classes, passes);
    out.gap = std::abs(out.a_prime - out.a_star);
    return out;
}

} // namespace bgadl
