#include "bgadl/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace bgadl {

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803u;
constexpr std::uint32_t kIdxLabels = 0x00000801u;
constexpr std::uint64_t kIdxMaxElements = 1ull << 33;

std::uint32_t read_be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

} // namespace

IdxArray parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw std::runtime_error("idx: truncated magic");
    IdxArray arr;
    arr.magic = read_be32(bytes.data());
    std::size_t ndim = 0;
    if (arr.magic == kIdxImages)
        ndim = 3;
    else if (arr.magic == kIdxLabels)
        ndim = 1;
    else
        throw std::runtime_error("idx: bad magic");
    if (bytes.size() < 4 + 4 * ndim) throw std::runtime_error("idx: truncated dimension header");
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
        const std::uint32_t d = read_be32(bytes.data() + 4 + 4 * i);
        if (d == 0) throw std::runtime_error("idx: zero dimension");
        total *= d;
        if (total > kIdxMaxElements) throw std::runtime_error("idx: dimension overflow");
        arr.dims.push_back(d);
    }
    const std::size_t header = 4 + 4 * ndim;
    if (bytes.size() < header + total) throw std::runtime_error("idx: truncated payload");
    if (bytes.size() > header + total) throw std::runtime_error("idx: trailing bytes after payload");
    arr.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return arr;
}

std::vector<std::uint8_t> encode_idx(const IdxArray& arr) {
    if (arr.magic != kIdxImages && arr.magic != kIdxLabels) throw std::invalid_argument("idx: bad magic");
    const std::size_t want_ndim = arr.magic == kIdxImages ? 3 : 1;
    if (arr.dims.size() != want_ndim) throw std::invalid_argument("idx: dimension count mismatch");
    std::uint64_t total = 1;
    for (std::size_t d : arr.dims) total *= d;
    if (arr.data.size() != total) throw std::invalid_argument("idx: payload size mismatch");
    std::vector<std::uint8_t> out;
    out.reserve(4 + 4 * arr.dims.size() + arr.data.size());
    write_be32(out, arr.magic);
    for (std::size_t d : arr.dims) write_be32(out, static_cast<std::uint32_t>(d));
    out.insert(out.end(), arr.data.begin(), arr.data.end());
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    is.seekg(0, std::ios::end);
    const std::streamoff n = is.tellg();
    is.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    if (n > 0 && !is.read(reinterpret_cast<char*>(bytes.data()), n)) throw std::runtime_error("read failed: " + path);
    return bytes;
}

RawDataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
    IdxArray imgs = parse_idx(read_file_bytes(images_path));
    IdxArray labs = parse_idx(read_file_bytes(labels_path));
    if (imgs.magic != kIdxImages) throw std::runtime_error("idx: " + images_path + " is not an image file");
    if (labs.magic != kIdxLabels) throw std::runtime_error("idx: " + labels_path + " is not a label file");
    const std::size_t n = imgs.dims[0];
    if (labs.dims[0] != n) throw std::runtime_error("idx: image/label count mismatch");
    const std::size_t h = imgs.dims[1], w = imgs.dims[2], d = h * w;

    RawDataset ds;
    ds.meta.dim = d;
    ds.meta.grid_h = h;
    ds.meta.grid_w = w;
    ds.meta.flip_safe = false;
    int max_label = 0;
    ds.images.reserve(n);
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor x({d});
        for (std::size_t j = 0; j < d; ++j) x.data[j] = normalize_byte(imgs.data[i * d + j]);
        ds.images.push_back(std::move(x));
        const int y = static_cast<int>(labs.data[i]) + 1;
        max_label = std::max(max_label, y);
        ds.labels.push_back(y);
    }
    ds.meta.class_count = max_label;
    return ds;
}

RawDataset make_synthetic(std::size_t n_per_class, int classes, std::size_t d, double blob_spread,
                          std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("make_synthetic: classes must be >= 2");
    if (d < 2) throw std::invalid_argument("make_synthetic: d must be >= 2");
    if (n_per_class < 1) throw std::invalid_argument("make_synthetic: n_per_class must be >= 1");
    if (blob_spread < 0.0) throw std::invalid_argument("make_synthetic: blob_spread must be >= 0");
    RawDataset ds;
    ds.meta.dim = d;
    ds.meta.class_count = classes;
    const double two_pi = 6.283185307179586476925286766559;
    // Class means on a circle embedded across every coordinate pair with
    // geometrically decaying radii: the leading plane carries most of the
    // separation, the tail planes add low-SNR signal a learner has to dig
    // out of the noise, which keeps the learning curve from saturating at
    // desk-scale budgets.
    for (int c = 1; c <= classes; ++c) {
        Tensor mean({d}, 0.5);
        const double ang = two_pi * static_cast<double>(c - 1) / static_cast<double>(classes);
        double radius = 0.3;
        for (std::size_t j = 0; j + 1 < d; j += 2) {
            mean.data[j] = 0.5 + radius * std::cos(ang);
            mean.data[j + 1] = 0.5 + radius * std::sin(ang);
            radius *= 0.8;
        }
        RngStream s = named_stream(seed, "synth", static_cast<std::uint64_t>(c));
        for (std::size_t i = 0; i < n_per_class; ++i) {
            Tensor x = mean;
            if (blob_spread > 0.0)
                for (double& v : x.data) v = std::min(1.0, std::max(0.0, v + blob_spread * s.gaussian()));
            ds.images.push_back(std::move(x));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

RawDataset make_image_fixture(std::size_t n_per_class, int classes, std::size_t grid, double noise,
                              int max_shift, std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("make_image_fixture: classes must be >= 2");
    if (grid < 8) throw std::invalid_argument("make_image_fixture: grid must be >= 8");
    if (max_shift < 0) throw std::invalid_argument("make_image_fixture: max_shift must be >= 0");
    const std::size_t d = grid * grid;
    RawDataset ds;
    ds.meta.dim = d;
    ds.meta.grid_h = grid;
    ds.meta.grid_w = grid;
    ds.meta.class_count = classes;
    ds.meta.flip_safe = false;

    const double g = static_cast<double>(grid);
    for (int c = 1; c <= classes; ++c) {
        // class template: a handful of gaussian strokes
        RngStream ts = named_stream(seed, "img_tpl", static_cast<std::uint64_t>(c));
        Tensor tpl({d}, 0.0);
        const int strokes = 4;
        for (int s = 0; s < strokes; ++s) {
            const double cx = (0.2 + 0.6 * ts.uniform()) * g;
            const double cy = (0.2 + 0.6 * ts.uniform()) * g;
            const double sig = 1.2 + 2.0 * ts.uniform();
            const double amp = 0.5 + 0.5 * ts.uniform();
            for (std::size_t r = 0; r < grid; ++r)
                for (std::size_t col = 0; col < grid; ++col) {
                    const double dy = static_cast<double>(r) - cy;
                    const double dx = static_cast<double>(col) - cx;
                    tpl.data[r * grid + col] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sig * sig));
                }
        }
        for (double& v : tpl.data) v = std::min(1.0, v);

        RngStream ss = named_stream(seed, "img_smp", static_cast<std::uint64_t>(c));
        for (std::size_t i = 0; i < n_per_class; ++i) {
            const int span = 2 * max_shift + 1;
            const int dx = max_shift > 0 ? static_cast<int>(ss.below(static_cast<std::uint64_t>(span))) - max_shift : 0;
            const int dy = max_shift > 0 ? static_cast<int>(ss.below(static_cast<std::uint64_t>(span))) - max_shift : 0;
            const double gain = 0.6 + 0.4 * ss.uniform();
            Tensor x({d}, 0.0);
            for (std::size_t r = 0; r < grid; ++r)
                for (std::size_t col = 0; col < grid; ++col) {
                    const long sr = static_cast<long>(r) - dy;
                    const long sc = static_cast<long>(col) - dx;
                    double v = 0.0;
                    if (sr >= 0 && sr < static_cast<long>(grid) && sc >= 0 && sc < static_cast<long>(grid))
                        v = gain * tpl.data[static_cast<std::size_t>(sr) * grid + static_cast<std::size_t>(sc)];
                    if (noise > 0.0) v += noise * ss.gaussian();
                    x.data[r * grid + col] = std::min(1.0, std::max(0.0, v));
                }
            ds.images.push_back(std::move(x));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

// --- fixture container ---

namespace {

static_assert(std::endian::native == std::endian::little, "dataset container io assumes a little-endian host");

constexpr char kDsMagic[4] = {'B', 'G', 'S', 'D'};
constexpr std::uint32_t kDsVersion = 1;

template <class T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("dataset: truncated file");
    return v;
}

} // namespace

void save_dataset(const std::string& path, const RawDataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dataset: cannot open " + path + " for writing");
    os.write(kDsMagic, 4);
    write_pod<std::uint32_t>(os, kDsVersion);
    write_pod<std::uint64_t>(os, ds.count());
    write_pod<std::uint64_t>(os, ds.meta.dim);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.meta.class_count));
    write_pod<std::uint64_t>(os, ds.meta.grid_h);
    write_pod<std::uint64_t>(os, ds.meta.grid_w);
    write_pod<std::uint8_t>(os, ds.meta.flip_safe ? 1 : 0);
    for (const Tensor& x : ds.images) {
        if (x.size() != ds.meta.dim) throw std::invalid_argument("dataset: sample dimension mismatch");
        os.write(reinterpret_cast<const char*>(x.data.data()),
                 static_cast<std::streamsize>(x.data.size() * sizeof(double)));
    }
    for (int y : ds.labels) write_pod<std::int32_t>(os, y);
    if (!os) throw std::runtime_error("dataset: write failed for " + path);
}

RawDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("dataset: cannot open " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kDsMagic, 4) != 0) throw std::runtime_error("dataset: bad magic");
    if (read_pod<std::uint32_t>(is) != kDsVersion) throw std::runtime_error("dataset: unsupported version");
    RawDataset ds;
    const std::uint64_t n = read_pod<std::uint64_t>(is);
    ds.meta.dim = read_pod<std::uint64_t>(is);
    ds.meta.class_count = static_cast<int>(read_pod<std::uint32_t>(is));
    ds.meta.grid_h = read_pod<std::uint64_t>(is);
    ds.meta.grid_w = read_pod<std::uint64_t>(is);
    ds.meta.flip_safe = read_pod<std::uint8_t>(is) != 0;
    ds.images.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Tensor x({ds.meta.dim});
        if (!is.read(reinterpret_cast<char*>(x.data.data()),
                     static_cast<std::streamsize>(x.data.size() * sizeof(double))))
            throw std::runtime_error("dataset: truncated images");
        ds.images.push_back(std::move(x));
    }
    ds.labels.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) ds.labels.push_back(read_pod<std::int32_t>(is));
    return ds;
}

// --- dataset state ---

std::size_t DatasetState::pool_live() const {
    std::size_t n = 0;
    for (const PoolItem& p : pool)
        if (!p.acquired) ++n;
    return n;
}

std::vector<std::size_t> DatasetState::live_pool_indices() const {
    std::vector<std::size_t> out;
    out.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (!pool[i].acquired) out.push_back(i);
    return out;
}

std::size_t DatasetState::labeled_real_count() const {
    std::size_t n = 0;
    for (const LabeledExample& e : labeled)
        if (!e.generated) ++n;
    return n;
}

int DatasetState::oracle_label(std::size_t index) {
    if (index >= pool.size()) throw std::out_of_range("oracle_label: index out of range");
    PoolItem& item = pool[index];
    if (item.acquired) throw std::logic_error("oracle_label: index already acquired");
    item.acquired = true;
    return item.hidden_label;
}

DatasetState split(const RawDataset& ds, std::size_t n_init_labeled, std::size_t n_test, std::uint64_t seed,
                   bool stratified) {
    const std::size_t n = ds.count();
    if (ds.labels.size() != n) throw std::invalid_argument("split: image/label count mismatch");
    if (n_init_labeled + n_test > n) throw std::invalid_argument("split: insufficient data");
    if (n_init_labeled < 1) throw std::invalid_argument("split: need at least one labeled sample");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream s = named_stream(seed, "split");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(s.below(n - i));
        std::swap(order[i], order[j]);
    }

    DatasetState st;
    st.meta = ds.meta;
    for (std::size_t i = 0; i < n_test; ++i) {
        const std::size_t id = order[i];
        st.test.push_back({ds.images[id], ds.labels[id], false});
    }

    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::vector<char> taken(rest.size(), 0);
    std::vector<std::size_t> init;
    init.reserve(n_init_labeled);
    if (stratified && n_init_labeled >= static_cast<std::size_t>(ds.meta.class_count)) {
        std::vector<char> seen(static_cast<std::size_t>(ds.meta.class_count) + 1, 0);
        for (std::size_t i = 0; i < rest.size() && init.size() < n_init_labeled; ++i) {
            const int y = ds.labels[rest[i]];
            if (y >= 1 && y <= ds.meta.class_count && !seen[static_cast<std::size_t>(y)]) {
                seen[static_cast<std::size_t>(y)] = 1;
                taken[i] = 1;
                init.push_back(rest[i]);
            }
        }
    }
    for (std::size_t i = 0; i < rest.size() && init.size() < n_init_labeled; ++i) {
        if (taken[i]) continue;
        taken[i] = 1;
        init.push_back(rest[i]);
    }
    for (std::size_t id : init) st.labeled.push_back({ds.images[id], ds.labels[id], false});
    for (std::size_t i = 0; i < rest.size(); ++i)
        if (!taken[i]) st.pool.push_back({ds.images[rest[i]], ds.labels[rest[i]], false});

    st.original_train_count = st.labeled.size() + st.pool.size();
    return st;
}

} // namespace bgadl
