#pragma once

// Learned per-pair contact maps: a distance net d̂(q_rel) and a moment-arm
// net predicting the two normal-projected arms, plus dataset generation near
// the contact manifold and a compact binary model format.

#include <cstring>
#include <fstream>
#include <numeric>

#include "cem/cspace.hpp"
#include "cem/mlp.hpp"

namespace cem {

struct TrainingSample {
    Se2State q_rel;  // pose of B in A's frame
    double d = 0.0;
    Vec2 x_star;  // closest/deepest point, A's frame
    Vec2 r_a;     // x_star - com_A, A's frame
    Vec2 r_b;     // x_star - com_B, A's frame
};

// Samples live on the broad-phase-reachable domain ‖t‖ ≤ R_A+R_B. near_frac
// of them are rejection-sampled into the band |d| ≤ band around the contact
// manifold; the rest are uniform over the domain.
inline std::vector<TrainingSample> sample_dataset(const Shape& a, const Shape& b, size_t count,
                                                  double near_frac = 0.9, double band = 0.1,
                                                  uint64_t seed = 1) {
    if (count == 0) throw std::invalid_argument("sample_dataset: count must be positive");
    const double rsum = a.bounding_radius() + b.bounding_radius();
    Rng rng(seed ^ hash_string(a.name().c_str()) ^
            (hash_string(b.name().c_str()) * 0x9e3779b97f4a7c15ull));

    auto draw = [&]() {
        const double r = rsum * std::sqrt(rng.uniform());
        const double phi = rng.uniform(-kPi, kPi);
        const double theta = rng.uniform(-kPi, kPi);
        return Se2State(theta, {r * std::cos(phi), r * std::sin(phi)});
    };
    auto make_sample = [&](const Se2State& q_rel) {
        const ContactQuery q = query(a, b, Se2State(0.0, {0.0, 0.0}), q_rel);
        TrainingSample s;
        s.q_rel = q_rel;
        s.d = q.d;
        s.x_star = q.x_star;
        s.r_a = q.x_star;
        s.r_b = q.x_star - q_rel.t;
        return s;
    };

    std::vector<TrainingSample> out;
    out.reserve(count);
    const size_t near_count = static_cast<size_t>(near_frac * count + 0.5);
    size_t attempts = 0;
    const size_t budget = 2000 * near_count + 100000;
    while (out.size() < near_count) {
        if (++attempts > budget)
            throw std::runtime_error("sample_dataset: rejection budget exhausted for pair " +
                                     a.name() + "/" + b.name());
        const TrainingSample s = make_sample(draw());
        if (std::abs(s.d) <= band) out.push_back(s);
    }
    while (out.size() < count) out.push_back(make_sample(draw()));
    return out;
}

struct NetSpec {
    int hidden_layers = 3;
    int width = 32;
};

struct TrainResult {
    Mlp net;
    TrainLog log;
    double heldout_mae = 0.0;
};

namespace detail {

inline std::array<double, 3> net_input(const Se2State& q_rel) {
    return {q_rel.theta, q_rel.t.x, q_rel.t.y};
}

// seeded 90/10 split; returns indices (train, heldout)
inline std::pair<std::vector<size_t>, std::vector<size_t>> split_indices(size_t n, uint64_t seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(seed * 0x2545f4914f6cdd1dull + 1);
    for (size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    const size_t held = std::max<size_t>(1, n / 10);
    std::vector<size_t> heldout(idx.end() - held, idx.end());
    idx.resize(n - held);
    return {std::move(idx), std::move(heldout)};
}

inline TrainResult fit(const std::vector<double>& xs, const std::vector<double>& ys, int out_dim,
                       const NetSpec& spec, const TrainHyper& hyper) {
    const size_t n = xs.size() / 3;
    auto [train_idx, held_idx] = split_indices(n, hyper.seed);
    std::vector<double> txs, tys;
    txs.reserve(train_idx.size() * 3);
    tys.reserve(train_idx.size() * out_dim);
    for (size_t i : train_idx) {
        txs.insert(txs.end(), xs.begin() + 3 * i, xs.begin() + 3 * i + 3);
        tys.insert(tys.end(), ys.begin() + out_dim * i, ys.begin() + out_dim * (i + 1));
    }
    TrainResult res;
    Rng init_rng(hyper.seed ^ 0xa5a5a5a5a5a5a5a5ull);
    res.net = make_mlp(3, spec.hidden_layers, spec.width, out_dim, init_rng);
    res.log = train_mse(res.net, txs, tys, train_idx.size(), hyper);
    double mae = 0.0;
    for (size_t i : held_idx) {
        const auto y = mlp_forward(res.net, std::span<const double>(xs.data() + 3 * i, 3));
        for (int c = 0; c < out_dim; ++c) mae += std::abs(y[c] - ys[out_dim * i + c]);
    }
    res.heldout_mae = mae / (static_cast<double>(held_idx.size()) * out_dim);
    return res;
}

}  // namespace detail

inline TrainResult train_distance(const std::vector<TrainingSample>& samples, const NetSpec& spec,
                                  const TrainHyper& hyper) {
    if (samples.empty()) throw std::invalid_argument("train_distance: empty dataset");
    std::vector<double> xs, ys;
    xs.reserve(samples.size() * 3);
    ys.reserve(samples.size());
    for (const auto& s : samples) {
        const auto in = detail::net_input(s.q_rel);
        xs.insert(xs.end(), in.begin(), in.end());
        ys.push_back(s.d);
    }
    return detail::fit(xs, ys, 1, spec, hyper);
}

// Arm targets [−r_A·n̂, r_B·n̂] use the unit normal n̂ from the distance net's
// spatial input gradient; samples whose gradient nearly vanishes are dropped.
inline TrainResult train_arms(const std::vector<TrainingSample>& samples, const Mlp& dist_net,
                              const NetSpec& spec, const TrainHyper& hyper) {
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        const auto in = detail::net_input(s.q_rel);
        const auto g = mlp_input_gradient(dist_net, in)[0];
        const Vec2 grad{g[1], g[2]};
        if (grad.norm() < 1e-6) continue;
        const Vec2 n = grad.normalized();
        xs.insert(xs.end(), in.begin(), in.end());
        ys.push_back(-s.r_a.dot(n));
        ys.push_back(s.r_b.dot(n));
    }
    if (xs.empty()) throw std::runtime_error("train_arms: every sample had a degenerate gradient");
    return detail::fit(xs, ys, 2, spec, hyper);
}

struct NeuralContactMap {
    Mlp dist_net;
    Mlp arm_net;
    std::string shape_a;
    std::string shape_b;
    double radius_sum = 0.0;

    double distance(const Se2State& q_rel) const {
        return mlp_forward(dist_net, detail::net_input(q_rel))[0];
    }

    // d̂, contact normal in A's frame (zero if degenerate), and the projected
    // arms [proj_ra, proj_rb] — the same quantities the oracle reports
    struct Eval {
        double d;
        Vec2 n_a_frame;
        double grad_theta;  // rotation component of the c-space gradient
        double proj_ra, proj_rb;
    };
    Eval evaluate(const Se2State& q_rel) const {
        const auto in = detail::net_input(q_rel);
        Eval e;
        e.d = mlp_forward(dist_net, in)[0];
        const auto g = mlp_input_gradient(dist_net, in)[0];
        e.grad_theta = g[0];
        const Vec2 grad{g[1], g[2]};
        e.n_a_frame = grad.norm() > 1e-12 ? grad.normalized() : Vec2{0.0, 0.0};
        const auto arms = mlp_forward(arm_net, in);
        e.proj_ra = arms[0];
        e.proj_rb = arms[1];
        return e;
    }
};

namespace detail {

inline uint32_t crc32(const void* data, size_t len, uint32_t crc = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xffffffffu;
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ p[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

struct ByteWriter {
    std::vector<unsigned char> bytes;
    template <class T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_string(const std::string& s) {
        put(static_cast<uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

struct ByteReader {
    const unsigned char* p;
    size_t remaining;
    template <class T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (remaining < sizeof(T)) throw std::runtime_error("contact map file truncated");
        T v;
        std::memcpy(&v, p, sizeof(T));
        p += sizeof(T);
        remaining -= sizeof(T);
        return v;
    }
    std::string get_string() {
        const uint32_t n = get<uint32_t>();
        if (remaining < n) throw std::runtime_error("contact map file truncated");
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        remaining -= n;
        return s;
    }
};

inline void write_net(ByteWriter& w, const Mlp& net) {
    w.put(static_cast<uint32_t>(net.layer_count()));
    for (int d : net.dims) w.put(static_cast<uint32_t>(d));
    for (size_t l = 0; l < net.layer_count(); ++l) {
        for (float v : net.weights[l]) w.put(v);
        for (float v : net.biases[l]) w.put(v);
    }
}

inline Mlp read_net(ByteReader& r) {
    const uint32_t layers = r.get<uint32_t>();
    if (layers == 0 || layers > 64) throw std::runtime_error("contact map file: bad layer count");
    Mlp net;
    for (uint32_t i = 0; i <= layers; ++i) {
        const uint32_t d = r.get<uint32_t>();
        if (d == 0 || d > 16384) throw std::runtime_error("contact map file: bad layer width");
        net.dims.push_back(static_cast<int>(d));
    }
    for (uint32_t l = 0; l < layers; ++l) {
        const size_t in = net.dims[l], out = net.dims[l + 1];
        std::vector<float> w(in * out), b(out);
        for (float& v : w) v = r.get<float>();
        for (float& v : b) v = r.get<float>();
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

inline void write_checked(const std::string& path, ByteWriter& w) {
    w.put(crc32(w.bytes.data(), w.bytes.size()));
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(w.bytes.data()),
            static_cast<std::streamsize>(w.bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::vector<unsigned char> read_checked(const std::string& path, const char magic[4]) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 8) throw std::runtime_error("contact map file truncated: " + path);
    if (std::memcmp(bytes.data(), magic, 4) != 0)
        throw std::runtime_error("bad magic in " + path);
    uint32_t stored;
    std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw std::runtime_error("checksum mismatch in " + path);
    bytes.resize(bytes.size() - 4);
    return bytes;
}

}  // namespace detail

constexpr uint32_t kMapFormatVersion = 1;

inline void save_map(const NeuralContactMap& map, const std::string& path) {
    detail::ByteWriter w;
    w.bytes = {'C', 'E', 'M', '1'};
    w.put(kMapFormatVersion);
    w.put_string(map.shape_a);
    w.put_string(map.shape_b);
    w.put(map.radius_sum);
    detail::write_net(w, map.dist_net);
    detail::write_net(w, map.arm_net);
    detail::write_checked(path, w);
}

inline NeuralContactMap load_map(const std::string& path) {
    const auto bytes = detail::read_checked(path, "CEM1");
    detail::ByteReader r{bytes.data() + 4, bytes.size() - 4};
    const uint32_t version = r.get<uint32_t>();
    if (version != kMapFormatVersion)
        throw std::runtime_error("unsupported contact map version in " + path);
    NeuralContactMap map;
    map.shape_a = r.get_string();
    map.shape_b = r.get_string();
    map.radius_sum = r.get<double>();
    map.dist_net = detail::read_net(r);
    map.arm_net = detail::read_net(r);
    if (map.dist_net.output_dim() != 1 || map.arm_net.output_dim() != 2)
        throw std::runtime_error("contact map file: wrong net output dims in " + path);
    return map;
}

// dataset cache: same header discipline, columnar sample records
inline void save_dataset(const std::vector<TrainingSample>& samples, const std::string& shape_a,
                         const std::string& shape_b, double radius_sum, const std::string& path) {
    detail::ByteWriter w;
    w.bytes = {'C', 'E', 'M', 'D'};
    w.put(kMapFormatVersion);
    w.put_string(shape_a);
    w.put_string(shape_b);
    w.put(radius_sum);
    w.put(static_cast<uint64_t>(samples.size()));
    auto column = [&](auto&& get) {
        for (const auto& s : samples) w.put(static_cast<double>(get(s)));
    };
    column([](const TrainingSample& s) { return s.q_rel.theta; });
    column([](const TrainingSample& s) { return s.q_rel.t.x; });
    column([](const TrainingSample& s) { return s.q_rel.t.y; });
    column([](const TrainingSample& s) { return s.d; });
    column([](const TrainingSample& s) { return s.x_star.x; });
    column([](const TrainingSample& s) { return s.x_star.y; });
    column([](const TrainingSample& s) { return s.r_a.x; });
    column([](const TrainingSample& s) { return s.r_a.y; });
    column([](const TrainingSample& s) { return s.r_b.x; });
    column([](const TrainingSample& s) { return s.r_b.y; });
    detail::write_checked(path, w);
}

struct DatasetFile {
    std::string shape_a, shape_b;
    double radius_sum = 0.0;
    std::vector<TrainingSample> samples;
};

inline DatasetFile load_dataset(const std::string& path) {
    const auto bytes = detail::read_checked(path, "CEMD");
    detail::ByteReader r{bytes.data() + 4, bytes.size() - 4};
    if (r.get<uint32_t>() != kMapFormatVersion)
        throw std::runtime_error("unsupported dataset version in " + path);
    DatasetFile out;
    out.shape_a = r.get_string();
    out.shape_b = r.get_string();
    out.radius_sum = r.get<double>();
    const uint64_t n = r.get<uint64_t>();
    if (n > (1ull << 32)) throw std::runtime_error("dataset file: implausible sample count");
    out.samples.resize(n);
    auto column = [&](auto&& set) {
        for (auto& s : out.samples) set(s, r.get<double>());
    };
    column([](TrainingSample& s, double v) { s.q_rel.theta = v; });
    column([](TrainingSample& s, double v) { s.q_rel.t.x = v; });
    column([](TrainingSample& s, double v) { s.q_rel.t.y = v; });
    column([](TrainingSample& s, double v) { s.d = v; });
    column([](TrainingSample& s, double v) { s.x_star.x = v; });
    column([](TrainingSample& s, double v) { s.x_star.y = v; });
    column([](TrainingSample& s, double v) { s.r_a.x = v; });
    column([](TrainingSample& s, double v) { s.r_a.y = v; });
    column([](TrainingSample& s, double v) { s.r_b.x = v; });
    column([](TrainingSample& s, double v) { s.r_b.y = v; });
    return out;
}

}  // namespace cem
