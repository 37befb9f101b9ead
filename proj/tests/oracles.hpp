#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "snipcorr/lstm.hpp"
#include "snipcorr/random.hpp"

namespace oracles {

using snipcorr::Rng;
using snipcorr::lstm::LstmCellParams;
using snipcorr::lstm::LstmState;
using snipcorr::lstm::Matrix;
using snipcorr::lstm::Vector;

inline void randomize(Matrix& m, Rng& rng, double scale) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
}
inline void randomize(Vector& v, Rng& rng, double scale) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-scale, scale);
}

inline double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Straight-line LSTM cell: one scalar loop per gate, no shared helpers.
inline LstmState cell(const Vector& x, const LstmState& s, const LstmCellParams& p) {
    const int h = p.hidden();
    const int d = p.input_width();
    LstmState out{Vector(h), Vector(h)};
    for (int k = 0; k < h; ++k) {
        double zf = p.b(0 * h + k), zi = p.b(1 * h + k), zc = p.b(2 * h + k), zo = p.b(3 * h + k);
        for (int j = 0; j < d; ++j) {
            zf += p.W(0 * h + k, j) * x(j);
            zi += p.W(1 * h + k, j) * x(j);
            zc += p.W(2 * h + k, j) * x(j);
            zo += p.W(3 * h + k, j) * x(j);
        }
        for (int j = 0; j < h; ++j) {
            zf += p.U(0 * h + k, j) * s.hidden(j);
            zi += p.U(1 * h + k, j) * s.hidden(j);
            zc += p.U(2 * h + k, j) * s.hidden(j);
            zo += p.U(3 * h + k, j) * s.hidden(j);
        }
        const double f1 = sig(zf);
        const double f2 = sig(zi);
        const double f3 = std::tanh(zc);
        const double f4 = sig(zo);
        out.cell(k) = f1 * s.cell(k) + f2 * f3;
        out.hidden(k) = f4 * std::tanh(out.cell(k));
    }
    return out;
}

// Largest |cell_forward - cell| over random cells of assorted sizes.
inline double cell_forward_error(std::uint64_t seed, int trials) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int h = 1 + trial % 6, d = 1 + trial % 4;
        LstmCellParams p{Matrix(4 * h, d), Matrix(4 * h, h), Vector(4 * h)};
        randomize(p.W, rng, 2.0);
        randomize(p.U, rng, 2.0);
        randomize(p.b, rng, 1.0);
        Vector x(d);
        randomize(x, rng, 3.0);
        LstmState s{Vector(h), Vector(h)};
        randomize(s.hidden, rng, 1.0);
        randomize(s.cell, rng, 2.0);
        const auto got = snipcorr::lstm::cell_forward(x, s, p);
        const auto want = cell(x, s, p);
        worst = std::max({worst, (got.hidden - want.hidden).cwiseAbs().maxCoeff(),
                          (got.cell - want.cell).cwiseAbs().maxCoeff()});
    }
    return worst;
}

struct TensorError {
    std::string name;
    double relative;  // ||fd - analytic|| / max(||fd||, ||analytic||)
};

// Central differences for every parameter tensor of a random h=3, d=2 network
// on one 4-step sequence. Instances alternate between 1 and 2 layers.
inline std::vector<TensorError> gradient_check(int instance, std::uint64_t seed, double eps = 1e-6) {
    using namespace snipcorr::lstm;
    Rng rng(seed + static_cast<std::uint64_t>(instance) * 7919);
    NetworkConfig cfg;
    cfg.num_layers = 1 + instance % 2;
    cfg.hidden_size = 3;
    cfg.tau = 1;
    cfg.input_channels = 2;
    cfg.output_channels = 1;
    cfg.rng_seed = static_cast<std::uint64_t>(instance) + 1;
    LstmNetwork net = LstmNetwork::initialize(cfg);
    for (auto& p : net.layers()) {
        randomize(p.W, rng, 0.8);
        randomize(p.U, rng, 0.8);
        randomize(p.b, rng, 0.5);
    }
    randomize(net.head_weights(), rng, 0.8);
    randomize(net.head_bias(), rng, 0.3);
    Sequence seq;
    seq.inputs.resize(cfg.input_width(), 4);
    seq.targets.resize(cfg.output_width(), 4);
    randomize(seq.inputs, rng, 1.5);
    randomize(seq.targets, rng, 1.0);
    const std::vector<const Sequence*> batch{&seq};
    Gradients g = Gradients::zeros_like(net);
    loss_and_gradients(net, batch, &g);

    struct Ref {
        std::string name;
        double* param;
        const double* grad;
        Eigen::Index size;
    };
    std::vector<Ref> refs;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto& p = net.layers()[l];
        const auto& q = g.layers[l];
        const std::string tag = "layer" + std::to_string(l) + ".";
        refs.push_back({tag + "W", p.W.data(), q.W.data(), p.W.size()});
        refs.push_back({tag + "U", p.U.data(), q.U.data(), p.U.size()});
        refs.push_back({tag + "b", p.b.data(), q.b.data(), p.b.size()});
    }
    refs.push_back({"head.W", net.head_weights().data(), g.head_W.data(), net.head_weights().size()});
    refs.push_back({"head.b", net.head_bias().data(), g.head_b.data(), net.head_bias().size()});

    std::vector<TensorError> out;
    for (const auto& t : refs) {
        double diff2 = 0.0, ana2 = 0.0, num2 = 0.0;
        for (Eigen::Index i = 0; i < t.size; ++i) {
            const double saved = t.param[i];
            t.param[i] = saved + eps;
            const double up = loss_and_gradients(net, batch, nullptr);
            t.param[i] = saved - eps;
            const double down = loss_and_gradients(net, batch, nullptr);
            t.param[i] = saved;
            const double fd = (up - down) / (2.0 * eps);
            diff2 += (fd - t.grad[i]) * (fd - t.grad[i]);
            ana2 += t.grad[i] * t.grad[i];
            num2 += fd * fd;
        }
        out.push_back({t.name, std::sqrt(diff2) / std::max({std::sqrt(ana2), std::sqrt(num2), 1e-12})});
    }
    return out;
}

// Row j of resample() must hold samples j*tau .. j*tau+tau-1 of each channel
// and the remainder must be gone.
inline bool resample_rule_holds(std::size_t n, int tau) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = static_cast<double>(i);
        b[i] = -static_cast<double>(i) - 0.5;
    }
    const Matrix r = snipcorr::lstm::resample({a, b}, tau);
    const std::size_t t = static_cast<std::size_t>(tau);
    const std::size_t rows = n / t;
    if (static_cast<std::size_t>(r.rows()) != rows || r.cols() != 2 * tau) return false;
    for (std::size_t j = 0; j < rows; ++j)
        for (std::size_t k = 0; k < t; ++k) {
            const auto row = static_cast<Eigen::Index>(j);
            const auto col = static_cast<Eigen::Index>(k);
            if (r(row, col) != a[j * t + k] || r(row, tau + col) != b[j * t + k]) return false;
        }
    const auto back = snipcorr::lstm::unresample(r, 2);
    return back[0].size() == rows * t && std::equal(back[0].begin(), back[0].end(), a.begin()) &&
           std::equal(back[1].begin(), back[1].end(), b.begin());
}

// Textbook single-pass sums in long double.
inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const long double n = static_cast<long double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    return static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

inline double r_squared(const std::vector<double>& t, const std::vector<double>& e) {
    long double mean = 0;
    for (double v : t) mean += v;
    mean /= static_cast<long double>(t.size());
    long double res = 0, tot = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        res += (static_cast<long double>(t[i]) - e[i]) * (static_cast<long double>(t[i]) - e[i]);
        tot += (t[i] - mean) * (t[i] - mean);
    }
    return static_cast<double>(1.0L - res / tot);
}

// Linear interpolation between order statistics, found by selection instead of a full sort.
inline double percentile(std::vector<double> v, double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const std::size_t j = static_cast<std::size_t>(h);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(j), v.end());
    const double lo = v[j];
    if (j + 1 >= v.size()) return lo;
    const double hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(j) + 1, v.end());
    return lo + (h - static_cast<double>(j)) * (hi - lo);
}

}  // namespace oracles
