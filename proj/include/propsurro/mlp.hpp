#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

// Fully connected feed-forward network, tanh on hidden layers and identity
// on the output. Columns are samples throughout, so a batch pass is a chain
// of GEMMs.
struct MlpNetwork {
    std::vector<int> widths;    // input, hidden..., output
    std::vector<Mat> weights;   // weights[i]: widths[i+1] x widths[i]
    std::vector<Vec> biases;    // biases[i]: widths[i+1]

    int input_width() const { return widths.front(); }
    int output_width() const { return widths.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }

    long parameter_count() const {
        long n = 0;
        for (int i = 0; i < layer_count(); ++i)
            n += weights[i].size() + biases[i].size();
        return n;
    }
};

// Xavier-style scaled uniform init. output_scale shrinks the last layer,
// which keeps an untrained generator's outputs small.
inline MlpNetwork make_mlp(const std::vector<int>& widths, Rng& rng,
                           double output_scale = 1.0) {
    if (widths.size() < 2) throw DimensionMismatch("make_mlp: need at least input and output widths");
    MlpNetwork net;
    net.widths = widths;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const int fan_in = widths[i], fan_out = widths[i + 1];
        double a = std::sqrt(6.0 / (fan_in + fan_out));
        if (i + 2 == widths.size()) a *= output_scale;
        Mat W(fan_out, fan_in);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c)
                W(r, c) = rng.uniform(-a, a);
        net.weights.push_back(std::move(W));
        net.biases.push_back(Vec::Zero(fan_out));
    }
    return net;
}

// Cached activations from a forward pass; activations[0] is the input batch,
// activations.back() the output.
struct ForwardTrace {
    std::vector<Mat> activations;
};

inline Mat mlp_forward_batch(const MlpNetwork& net, const Mat& X, ForwardTrace* trace = nullptr) {
    if (X.rows() != net.input_width())
        throw DimensionMismatch("mlp_forward: input rows != network input width");
    Mat a = X;
    if (trace) { trace->activations.clear(); trace->activations.push_back(a); }
    for (int i = 0; i < net.layer_count(); ++i) {
        Mat z = net.weights[i] * a;
        z.colwise() += net.biases[i];
        if (i + 1 < net.layer_count()) z = z.array().tanh();
        a = std::move(z);
        if (trace) trace->activations.push_back(a);
    }
    return a;
}

inline Vec mlp_forward(const MlpNetwork& net, const Vec& x) {
    return mlp_forward_batch(net, x);
}

struct MlpGradients {
    std::vector<Mat> d_weights;
    std::vector<Vec> d_biases;
    Mat d_input;  // gradient w.r.t. the input batch
};

// Reverse-mode pass. d_output is dLoss/dY on the traced batch; gradients are
// summed over the batch (divide by batch size in the loss if a mean is wanted).
inline MlpGradients mlp_backward(const MlpNetwork& net, const ForwardTrace& trace,
                                 const Mat& d_output) {
    const int L = net.layer_count();
    if (static_cast<int>(trace.activations.size()) != L + 1)
        throw DimensionMismatch("mlp_backward: trace does not match network");
    if (d_output.rows() != net.output_width() || d_output.cols() != trace.activations[0].cols())
        throw DimensionMismatch("mlp_backward: d_output shape");
    MlpGradients g;
    g.d_weights.resize(L);
    g.d_biases.resize(L);
    Mat delta = d_output;
    for (int i = L - 1; i >= 0; --i) {
        if (i + 1 < L) {
            // through tanh: y = tanh(z), dz = dy * (1 - y^2)
            delta = delta.cwiseProduct((1.0 - trace.activations[i + 1].array().square()).matrix());
        }
        g.d_weights[i].noalias() = delta * trace.activations[i].transpose();
        g.d_biases[i] = delta.rowwise().sum();
        if (i > 0)
            delta = net.weights[i].transpose() * delta;
        else
            g.d_input.noalias() = net.weights[0].transpose() * delta;
    }
    return g;
}

// Gradient of a scalar loss of the outputs w.r.t. every weight and bias for
// one input. loss returns (value, dLoss/dy).
inline std::pair<double, MlpGradients> mlp_gradient(
    const MlpNetwork& net, const std::function<std::pair<double, Vec>(const Vec&)>& loss,
    const Vec& x) {
    ForwardTrace trace;
    Mat y = mlp_forward_batch(net, x, &trace);
    auto [value, dy] = loss(y.col(0));
    if (dy.size() != net.output_width())
        throw DimensionMismatch("mlp_gradient: loss gradient size");
    MlpGradients g = mlp_backward(net, trace, dy);
    return {value, std::move(g)};
}

// ---------------------- flat parameter vector view ----------------------
// Adam runs on one flat vector; these pack/unpack all layers.

inline Vec mlp_pack(const MlpNetwork& net) {
    Vec p(net.parameter_count());
    Eigen::Index off = 0;
    for (int i = 0; i < net.layer_count(); ++i) {
        Eigen::Map<const Vec> w(net.weights[i].data(), net.weights[i].size());
        p.segment(off, w.size()) = w;
        off += w.size();
        p.segment(off, net.biases[i].size()) = net.biases[i];
        off += net.biases[i].size();
    }
    return p;
}

inline void mlp_unpack(MlpNetwork& net, const Vec& p) {
    if (p.size() != net.parameter_count())
        throw DimensionMismatch("mlp_unpack: parameter vector size");
    Eigen::Index off = 0;
    for (int i = 0; i < net.layer_count(); ++i) {
        Eigen::Map<Vec>(net.weights[i].data(), net.weights[i].size()) =
            p.segment(off, net.weights[i].size());
        off += net.weights[i].size();
        net.biases[i] = p.segment(off, net.biases[i].size());
        off += net.biases[i].size();
    }
}

inline Vec mlp_pack_gradients(const MlpNetwork& net, const MlpGradients& g) {
    Vec p(net.parameter_count());
    Eigen::Index off = 0;
    for (int i = 0; i < net.layer_count(); ++i) {
        Eigen::Map<const Vec> w(g.d_weights[i].data(), g.d_weights[i].size());
        p.segment(off, w.size()) = w;
        off += w.size();
        p.segment(off, g.d_biases[i].size()) = g.d_biases[i];
        off += g.d_biases[i].size();
    }
    return p;
}

}  // namespace propsurro
