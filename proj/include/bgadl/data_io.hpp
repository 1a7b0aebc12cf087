#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "bgadl/rng.hpp"
#include "bgadl/tensor.hpp"

namespace bgadl {

struct DatasetMeta {
    std::size_t dim = 0;
    std::size_t grid_h = 0; // 0 when the data has no grid shape
    std::size_t grid_w = 0;
    int class_count = 0;
    bool flip_safe = false;
};

// Labels are 1-based class ids in {1..C}; pixel values live in [0,1].
struct RawDataset {
    std::vector<Tensor> images; // each sample is a flat {d} tensor
    std::vector<int> labels;
    DatasetMeta meta;
    std::size_t count() const { return images.size(); }
};

// --- IDX (MNIST distribution format) ---

struct IdxArray {
    std::uint32_t magic = 0; // 0x00000803 images, 0x00000801 labels
    std::vector<std::size_t> dims;
    std::vector<std::uint8_t> data;
};

IdxArray parse_idx(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_idx(const IdxArray& arr);
std::vector<std::uint8_t> read_file_bytes(const std::string& path);

// byte 0..255 → v/255.0 exactly
inline double normalize_byte(std::uint8_t v) { return static_cast<double>(v) / 255.0; }

RawDataset load_idx_dataset(const std::string& images_path, const std::string& labels_path);

// --- synthetic datasets ---

// Gaussian blobs: class means on a circle inside [0,1]^d (first two dims),
// noise blob_spread per coordinate, clipped to [0,1].
RawDataset make_synthetic(std::size_t n_per_class, int classes, std::size_t d, double blob_spread,
                          std::uint64_t seed);

// Image-shaped fixture: one smooth multi-stroke template per class, samples
// are shifted, intensity-jittered, noisy copies. A desk-scale stand-in for a
// handwritten-digit set when no IDX files are available.
RawDataset make_image_fixture(std::size_t n_per_class, int classes, std::size_t grid, double noise,
                              int max_shift, std::uint64_t seed);

// --- fixture container (header + float64 little-endian payload) ---

void save_dataset(const std::string& path, const RawDataset& ds);
RawDataset load_dataset(const std::string& path);

// --- experiment dataset state ---

struct LabeledExample {
    Tensor x;
    int y = 0;
    bool generated = false;
};

struct PoolItem {
    Tensor x;
    int hidden_label = 0;
    bool acquired = false;
};

struct DatasetState {
    std::vector<LabeledExample> labeled;
    std::vector<PoolItem> pool;
    std::vector<LabeledExample> test;
    long generated_count = 0;
    DatasetMeta meta;
    std::size_t original_train_count = 0; // real (labeled + pool) at split time

    std::size_t pool_live() const;
    std::vector<std::size_t> live_pool_indices() const;
    std::size_t labeled_real_count() const;

    // Reveals the hidden ground-truth label exactly once; a second request
    // for the same index is an error.
    int oracle_label(std::size_t index);
};

// Deterministic disjoint split. Stratified keeps at least one example of
// every class in the initial labeled set when n_init_labeled >= C.
DatasetState split(const RawDataset& ds, std::size_t n_init_labeled, std::size_t n_test, std::uint64_t seed,
                   bool stratified = true);

} // namespace bgadl
