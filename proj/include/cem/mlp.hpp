#pragma once

// Small fully-connected rectifier networks, trained from scratch with
// adaptive-moment gradient descent. Weights are stored in float (the
// serialized precision); inference runs in double so the piecewise-linear
// function and its input gradient are exact for test oracles.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cem/math.hpp"

namespace cem {

struct Mlp {
    std::vector<int> dims;                        // layer widths, input first
    std::vector<std::vector<float>> weights;      // per layer, row-major out x in
    std::vector<std::vector<float>> biases;       // per layer

    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    size_t layer_count() const { return weights.size(); }

    size_t parameter_count() const {
        size_t n = 0;
        for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
        return n;
    }
};

// hidden_layers x width, e.g. {3, 32} -> dims {in, 32, 32, 32, out}
inline Mlp make_mlp(int input_dim, int hidden_layers, int width, int output_dim, Rng& rng) {
    Mlp net;
    net.dims.push_back(input_dim);
    for (int i = 0; i < hidden_layers; ++i) net.dims.push_back(width);
    net.dims.push_back(output_dim);
    for (size_t l = 0; l + 1 < net.dims.size(); ++l) {
        const int in = net.dims[l], out = net.dims[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<float> w(static_cast<size_t>(out) * in);
        for (float& x : w) x = static_cast<float>(rng.uniform(-scale, scale));
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::vector<float>(out, 0.0f));
    }
    return net;
}

inline std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
    if (static_cast<int>(input.size()) != net.input_dim())
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    for (size_t l = 0; l < net.layer_count(); ++l) {
        const int in = net.dims[l], out = net.dims[l + 1];
        const bool last = (l + 1 == net.layer_count());
        next.assign(out, 0.0);
        const float* w = net.weights[l].data();
        for (int o = 0; o < out; ++o) {
            double s = net.biases[l][o];
            const float* row = w + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += static_cast<double>(row[i]) * act[i];
            next[o] = (!last && s < 0.0) ? 0.0 : s;
        }
        act.swap(next);
    }
    return act;
}

// Exact reverse-mode input gradient of the piecewise-linear network.
// Returns output_dim rows of input_dim entries.
inline std::vector<std::vector<double>> mlp_input_gradient(const Mlp& net,
                                                           std::span<const double> input) {
    if (static_cast<int>(input.size()) != net.input_dim())
        throw std::invalid_argument("mlp_input_gradient: input dimension mismatch");
    // forward, remembering rectifier masks
    std::vector<std::vector<char>> masks;
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    for (size_t l = 0; l < net.layer_count(); ++l) {
        const int in = net.dims[l], out = net.dims[l + 1];
        const bool last = (l + 1 == net.layer_count());
        next.assign(out, 0.0);
        std::vector<char> mask(out, 1);
        const float* w = net.weights[l].data();
        for (int o = 0; o < out; ++o) {
            double s = net.biases[l][o];
            const float* row = w + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += static_cast<double>(row[i]) * act[i];
            if (!last && s < 0.0) {
                s = 0.0;
                mask[o] = 0;
            }
            next[o] = s;
        }
        masks.push_back(std::move(mask));
        act.swap(next);
    }
    // backward per output row
    std::vector<std::vector<double>> grads;
    for (int row = 0; row < net.output_dim(); ++row) {
        std::vector<double> g(net.output_dim(), 0.0);
        g[row] = 1.0;
        for (int l = static_cast<int>(net.layer_count()) - 1; l >= 0; --l) {
            const int in = net.dims[l], out = net.dims[l + 1];
            const bool last = (l + 1 == static_cast<int>(net.layer_count()));
            std::vector<double> gi(in, 0.0);
            const float* w = net.weights[l].data();
            for (int o = 0; o < out; ++o) {
                const double go = (last || masks[l][o]) ? g[o] : 0.0;
                if (go == 0.0) continue;
                const float* wrow = w + static_cast<size_t>(o) * in;
                for (int i = 0; i < in; ++i) gi[i] += go * static_cast<double>(wrow[i]);
            }
            g.swap(gi);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

struct TrainHyper {
    double learning_rate = 1e-3;
    int batch_size = 1024;
    int epochs = 200;
    uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainLog {
    std::vector<double> epoch_loss;  // mean squared error per epoch
};

// Least-squares training on (inputs, targets), both row-major. Deterministic
// for a fixed seed: fixed shuffle stream and fixed summation order. Throws on
// a non-finite loss.
inline TrainLog train_mse(Mlp& net, const std::vector<double>& inputs,
                          const std::vector<double>& targets, size_t count,
                          const TrainHyper& hyper) {
    const int din = net.input_dim(), dout = net.output_dim();
    if (count == 0) throw std::invalid_argument("train_mse: empty dataset");
    if (inputs.size() != count * din || targets.size() != count * dout)
        throw std::invalid_argument("train_mse: data size mismatch");

    const int layers = static_cast<int>(net.layer_count());
    // float working copies + Adam state
    std::vector<std::vector<float>> w = net.weights, b = net.biases;
    std::vector<std::vector<float>> wt(layers);  // transposed weights, in x out
    std::vector<std::vector<float>> mw(layers), vw(layers), mb(layers), vb(layers);
    std::vector<std::vector<float>> gw(layers), gb(layers);
    for (int l = 0; l < layers; ++l) {
        mw[l].assign(w[l].size(), 0.0f);
        vw[l].assign(w[l].size(), 0.0f);
        mb[l].assign(b[l].size(), 0.0f);
        vb[l].assign(b[l].size(), 0.0f);
        gw[l].resize(w[l].size());
        gb[l].resize(b[l].size());
        wt[l].resize(w[l].size());
    }
    auto refresh_transpose = [&](int l) {
        const int in = net.dims[l], out = net.dims[l + 1];
        for (int o = 0; o < out; ++o)
            for (int i = 0; i < in; ++i)
                wt[l][static_cast<size_t>(i) * out + o] = w[l][static_cast<size_t>(o) * in + i];
    };
    for (int l = 0; l < layers; ++l) refresh_transpose(l);

    std::vector<uint32_t> order(count);
    for (size_t i = 0; i < count; ++i) order[i] = static_cast<uint32_t>(i);
    Rng rng(hyper.seed);

    const int bs = hyper.batch_size;
    std::vector<std::vector<float>> act(layers + 1);  // batch activations
    std::vector<std::vector<float>> delta(layers + 1);
    std::vector<float> batch_target;
    TrainLog log;
    long adam_t = 0;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fisher-Yates with the fixed stream
        for (size_t i = count; i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);

        double epoch_sse = 0.0;
        for (size_t start = 0; start < count; start += bs) {
            const int nb = static_cast<int>(std::min<size_t>(bs, count - start));
            act[0].resize(static_cast<size_t>(nb) * din);
            batch_target.resize(static_cast<size_t>(nb) * dout);
            for (int r = 0; r < nb; ++r) {
                const uint32_t idx = order[start + r];
                for (int c = 0; c < din; ++c)
                    act[0][static_cast<size_t>(r) * din + c] =
                        static_cast<float>(inputs[static_cast<size_t>(idx) * din + c]);
                for (int c = 0; c < dout; ++c)
                    batch_target[static_cast<size_t>(r) * dout + c] =
                        static_cast<float>(targets[static_cast<size_t>(idx) * dout + c]);
            }
            // forward
            for (int l = 0; l < layers; ++l) {
                const int in = net.dims[l], out = net.dims[l + 1];
                const bool last = (l + 1 == layers);
                act[l + 1].assign(static_cast<size_t>(nb) * out, 0.0f);
                const float* x = act[l].data();
                float* y = act[l + 1].data();
                const float* t = wt[l].data();
                for (int r = 0; r < nb; ++r) {
                    float* yr = y + static_cast<size_t>(r) * out;
                    for (int o = 0; o < out; ++o) yr[o] = b[l][o];
                    const float* xr = x + static_cast<size_t>(r) * in;
                    for (int i = 0; i < in; ++i) {
                        const float xv = xr[i];
                        if (xv == 0.0f) continue;
                        const float* trow = t + static_cast<size_t>(i) * out;
                        for (int o = 0; o < out; ++o) yr[o] += xv * trow[o];
                    }
                    if (!last)
                        for (int o = 0; o < out; ++o)
                            if (yr[o] < 0.0f) yr[o] = 0.0f;
                }
            }
            // output delta: 2 (y - t) / (nb * dout)
            {
                const float* y = act[layers].data();
                delta[layers].resize(static_cast<size_t>(nb) * dout);
                const float inv = 2.0f / (static_cast<float>(nb) * dout);
                for (size_t i = 0; i < static_cast<size_t>(nb) * dout; ++i) {
                    const float e = y[i] - batch_target[i];
                    epoch_sse += 0.5 * static_cast<double>(e) * e;  // *2/(nb dout) applied below
                    delta[layers][i] = inv * e;
                }
            }
            // backward
            for (int l = layers - 1; l >= 0; --l) {
                const int in = net.dims[l], out = net.dims[l + 1];
                std::fill(gw[l].begin(), gw[l].end(), 0.0f);
                std::fill(gb[l].begin(), gb[l].end(), 0.0f);
                delta[l].assign(static_cast<size_t>(nb) * in, 0.0f);
                const float* x = act[l].data();
                const float* dy = delta[l + 1].data();
                float* dx = delta[l].data();
                const float* wl = w[l].data();
                for (int r = 0; r < nb; ++r) {
                    const float* xr = x + static_cast<size_t>(r) * in;
                    const float* dyr = dy + static_cast<size_t>(r) * out;
                    float* dxr = dx + static_cast<size_t>(r) * in;
                    for (int o = 0; o < out; ++o) {
                        const float g = dyr[o];
                        if (g == 0.0f) continue;
                        gb[l][o] += g;
                        float* gwrow = gw[l].data() + static_cast<size_t>(o) * in;
                        const float* wrow = wl + static_cast<size_t>(o) * in;
                        for (int i = 0; i < in; ++i) {
                            gwrow[i] += g * xr[i];
                            dxr[i] += g * wrow[i];
                        }
                    }
                }
                if (l > 0) {
                    // rectifier mask: act[l] == 0 means the unit was clamped
                    const float* al = act[l].data();
                    for (size_t i = 0; i < static_cast<size_t>(nb) * in; ++i)
                        if (al[i] == 0.0f) dx[i] = 0.0f;
                }
            }
            // Adam step
            ++adam_t;
            const float c1 = 1.0f - static_cast<float>(std::pow(hyper.beta1, adam_t));
            const float c2 = 1.0f - static_cast<float>(std::pow(hyper.beta2, adam_t));
            const float lr = static_cast<float>(hyper.learning_rate);
            const float b1 = static_cast<float>(hyper.beta1), b2 = static_cast<float>(hyper.beta2);
            const float ae = static_cast<float>(hyper.adam_eps);
            for (int l = 0; l < layers; ++l) {
                auto update = [&](std::vector<float>& p, std::vector<float>& g,
                                  std::vector<float>& m, std::vector<float>& v) {
                    for (size_t i = 0; i < p.size(); ++i) {
                        m[i] = b1 * m[i] + (1.0f - b1) * g[i];
                        v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
                        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + ae);
                    }
                };
                update(w[l], gw[l], mw[l], vw[l]);
                update(b[l], gb[l], mb[l], vb[l]);
                refresh_transpose(l);
            }
        }
        const double mse = 2.0 * epoch_sse / (static_cast<double>(count) * dout);
        if (!std::isfinite(mse))
            throw std::runtime_error("train_mse: loss diverged at epoch " + std::to_string(epoch));
        log.epoch_loss.push_back(mse);
    }

    net.weights = std::move(w);
    net.biases = std::move(b);
    return log;
}

}  // namespace cem
