#include "rndkit/densenet.hpp"

#include <cmath>

#include "rndkit/serialize.hpp"

namespace rndkit {

size_t DenseNet::num_params() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.a.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

namespace {

Mat scaled_uniform_init(int out_dim, int in_dim, Rng& rng) {
    double limit = std::sqrt(6.0 / (in_dim + out_dim));
    Mat w(out_dim, in_dim);
    for (auto& x : w.a) x = rng.uniform(-limit, limit);
    return w;
}

// Random orthogonal matrix: Householder QR of a square gaussian matrix with
// the sign of R's diagonal folded into Q. The (out_dim, in_dim) slice of Q
// scaled by gain becomes the weight.
Mat orthogonal_init(int out_dim, int in_dim, double gain, Rng& rng) {
    int n = std::max(out_dim, in_dim);
    Mat a(n, n);
    for (auto& x : a.a) x = rng.normal();

    std::vector<std::vector<double>> vs(n);
    std::vector<double> betas(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double norm2 = 0.0;
        for (int i = k; i < n; ++i) norm2 += a(i, k) * a(i, k);
        double norm = std::sqrt(norm2);
        std::vector<double> v(n - k, 0.0);
        if (norm == 0.0) {
            vs[k] = std::move(v);
            continue;
        }
        double alpha = a(k, k) >= 0 ? -norm : norm;
        for (int i = k; i < n; ++i) v[i - k] = a(i, k);
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 == 0.0) {
            vs[k] = std::move(v);
            continue;
        }
        double beta = 2.0 / vnorm2;
        for (int j = k; j < n; ++j) {
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += v[i - k] * a(i, j);
            double s = beta * dot;
            for (int i = k; i < n; ++i) a(i, j) -= s * v[i - k];
        }
        betas[k] = beta;
        vs[k] = std::move(v);
    }

    // Accumulate Q = H_0 H_1 ... H_{n-1} by applying reflectors to I in
    // reverse order.
    Mat q(n, n);
    for (int i = 0; i < n; ++i) q(i, i) = 1.0;
    for (int k = n - 1; k >= 0; --k) {
        if (betas[k] == 0.0) continue;
        const auto& v = vs[k];
        for (int j = 0; j < n; ++j) {
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += v[i - k] * q(i, j);
            double s = betas[k] * dot;
            for (int i = k; i < n; ++i) q(i, j) -= s * v[i - k];
        }
    }

    // Sign correction: Q <- Q * diag(sign(R_kk)) makes the draw uniform.
    for (int k = 0; k < n; ++k) {
        double sign = a(k, k) >= 0 ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) q(i, k) *= sign;
    }

    Mat w(out_dim, in_dim);
    for (int i = 0; i < out_dim; ++i)
        for (int j = 0; j < in_dim; ++j) w(i, j) = gain * q(i, j);
    return w;
}

double apply_hidden(double z, HiddenAct act) {
    if (act == HiddenAct::ReLU) return z > 0 ? z : 0.0;
    return z > 0 ? z : kLeakySlope * z;
}

double hidden_grad(double z, HiddenAct act) {
    if (act == HiddenAct::ReLU) return z > 0 ? 1.0 : 0.0;
    return z > 0 ? 1.0 : kLeakySlope;
}

}  // namespace

DenseNet init_dense_net(const std::vector<int>& layer_sizes, InitScheme scheme, uint64_t seed,
                        HiddenAct hidden_act, OutputAct output_act, bool trainable) {
    if (layer_sizes.size() < 2) throw ShapeError("init_dense_net: need at least 2 layer sizes");
    for (int s : layer_sizes)
        if (s <= 0) throw ShapeError("init_dense_net: layer sizes must be positive");

    DenseNet net;
    net.layer_sizes = layer_sizes;
    net.hidden_act = hidden_act;
    net.output_act = output_act;
    net.trainable = trainable;
    net.init_scheme = scheme;
    net.init_seed = seed;

    Rng rng(seed);
    int L = static_cast<int>(layer_sizes.size()) - 1;
    for (int l = 0; l < L; ++l) {
        int in_dim = layer_sizes[l];
        int out_dim = layer_sizes[l + 1];
        Rng layer_rng = rng.split(static_cast<uint64_t>(l));
        if (scheme == InitScheme::ScaledUniform) {
            net.weights.push_back(scaled_uniform_init(out_dim, in_dim, layer_rng));
        } else {
            net.weights.push_back(orthogonal_init(out_dim, in_dim, std::sqrt(2.0), layer_rng));
        }
        net.biases.emplace_back(out_dim, 0.0);
    }
    return net;
}

Mat forward(const DenseNet& net, const Mat& X, ForwardCache* cache) {
    if (X.cols != net.input_dim())
        throw ShapeError("forward: input has " + std::to_string(X.cols) + " cols, net expects " +
                         std::to_string(net.input_dim()));
    if (cache) {
        cache->net = &net;
        cache->version = net.version;
        cache->pre.clear();
        cache->post.clear();
        cache->post.push_back(X);
    }

    Mat act = X;
    int L = net.num_layers();
    for (int l = 0; l < L; ++l) {
        Mat z = matmul_nt(act, net.weights[l]);
        add_row_inplace(z, net.biases[l]);
        if (cache) cache->pre.push_back(z);
        bool last = (l == L - 1);
        Mat out(z.rows, z.cols);
        if (last) {
            if (net.output_act == OutputAct::Identity) {
                out = z;
            } else {
                for (size_t i = 0; i < z.a.size(); ++i) out.a[i] = 1.0 / (1.0 + std::exp(-z.a[i]));
            }
        } else {
            for (size_t i = 0; i < z.a.size(); ++i) out.a[i] = apply_hidden(z.a[i], net.hidden_act);
        }
        if (cache && !last) cache->post.push_back(out);
        act = std::move(out);
    }
    if (cache) cache->post.push_back(act);
    return act;
}

Gradients backward(const DenseNet& net, const ForwardCache& cache, const Mat& dY) {
    if (cache.net != &net)
        throw InvalidStateError("backward: cache was built by a different net");
    if (cache.version != net.version)
        throw InvalidStateError("backward: parameters changed since forward pass");
    int L = net.num_layers();
    if (static_cast<int>(cache.pre.size()) != L)
        throw InvalidStateError("backward: incomplete forward cache");
    const Mat& y = cache.post.back();
    if (dY.rows != y.rows || dY.cols != y.cols)
        throw ShapeError("backward: dY shape does not match forward output");

    Gradients g;
    g.dW.resize(L);
    g.db.resize(L);

    // dZ for the output layer
    Mat dZ = dY;
    if (net.output_act == OutputAct::Sigmoid) {
        for (size_t i = 0; i < dZ.a.size(); ++i) {
            double s = y.a[i];
            dZ.a[i] *= s * (1.0 - s);
        }
    }

    for (int l = L - 1; l >= 0; --l) {
        const Mat& a_prev = cache.post[l];
        g.dW[l] = matmul_tn(dZ, a_prev);
        g.db[l] = col_sum(dZ);
        if (l > 0) {
            Mat dA = matmul(dZ, net.weights[l]);
            const Mat& z_prev = cache.pre[l - 1];
            for (size_t i = 0; i < dA.a.size(); ++i)
                dA.a[i] *= hidden_grad(z_prev.a[i], net.hidden_act);
            dZ = std::move(dA);
        } else {
            g.dX = matmul(dZ, net.weights[0]);
        }
    }
    return g;
}

AdamState init_adam(const DenseNet& net, double learning_rate, double beta1, double beta2,
                    double eps) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.t = 0;
    for (const auto& w : net.weights) {
        s.m_w.emplace_back(w.rows, w.cols);
        s.v_w.emplace_back(w.rows, w.cols);
    }
    for (const auto& b : net.biases) {
        s.m_b.emplace_back(b.size(), 0.0);
        s.v_b.emplace_back(b.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(double lr, double b1, double b2, double eps, double bc1, double bc2, double g,
                 double& m, double& v, double& p) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    double mhat = m / bc1;
    double vhat = v / bc2;
    p -= lr * mhat / (std::sqrt(vhat) + eps);
}

}  // namespace

void adam_step(AdamState& state, DenseNet& net, const Gradients& grads) {
    if (!net.trainable) throw InvalidStateError("adam_step: net is frozen");
    int L = net.num_layers();
    if (static_cast<int>(grads.dW.size()) != L || static_cast<int>(state.m_w.size()) != L)
        throw ShapeError("adam_step: gradient/state layer count mismatch");

    state.t += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (int l = 0; l < L; ++l) {
        Mat& w = net.weights[l];
        const Mat& dw = grads.dW[l];
        if (dw.rows != w.rows || dw.cols != w.cols)
            throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(l));
        for (size_t i = 0; i < w.a.size(); ++i)
            adam_update(state.learning_rate, state.beta1, state.beta2, state.eps, bc1, bc2,
                        dw.a[i], state.m_w[l].a[i], state.v_w[l].a[i], w.a[i]);
        Vec& b = net.biases[l];
        const Vec& db = grads.db[l];
        if (db.size() != b.size())
            throw ShapeError("adam_step: bias gradient size mismatch at layer " +
                             std::to_string(l));
        for (size_t i = 0; i < b.size(); ++i)
            adam_update(state.learning_rate, state.beta1, state.beta2, state.eps, bc1, bc2,
                        db[i], state.m_b[l][i], state.v_b[l][i], b[i]);
    }
    net.version += 1;
}

void write_densenet(BinWriter& w, const DenseNet& net) {
    w.u32(static_cast<uint32_t>(net.layer_sizes.size()));
    for (int s : net.layer_sizes) w.i32(s);
    w.u8(static_cast<uint8_t>(net.hidden_act));
    w.u8(static_cast<uint8_t>(net.output_act));
    w.u8(net.trainable ? 1 : 0);
    w.u8(static_cast<uint8_t>(net.init_scheme));
    w.u64(net.init_seed);
    w.u64(net.version);
    for (const auto& m : net.weights) w.mat(m);
    for (const auto& b : net.biases) w.vec(b);
}

DenseNet read_densenet(BinReader& r) {
    DenseNet net;
    uint32_t n = r.u32();
    if (n < 2 || n > 1024) throw SerializeError("densenet: bad layer count");
    net.layer_sizes.resize(n);
    for (auto& s : net.layer_sizes) s = r.i32();
    net.hidden_act = static_cast<HiddenAct>(r.u8());
    net.output_act = static_cast<OutputAct>(r.u8());
    net.trainable = r.u8() != 0;
    net.init_scheme = static_cast<InitScheme>(r.u8());
    net.init_seed = r.u64();
    net.version = r.u64();
    for (size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        Mat m = r.mat();
        if (m.rows != net.layer_sizes[l + 1] || m.cols != net.layer_sizes[l])
            throw SerializeError("densenet: weight shape mismatch at layer " + std::to_string(l));
        net.weights.push_back(std::move(m));
    }
    for (size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        Vec b = r.vec();
        if (static_cast<int>(b.size()) != net.layer_sizes[l + 1])
            throw SerializeError("densenet: bias size mismatch at layer " + std::to_string(l));
        net.biases.push_back(std::move(b));
    }
    return net;
}

std::vector<uint8_t> serialize_densenet(const DenseNet& net) {
    BinWriter w;
    write_densenet(w, net);
    return w.take();
}

DenseNet deserialize_densenet(const std::vector<uint8_t>& data) {
    BinReader r(data);
    DenseNet net = read_densenet(r);
    if (!r.at_end()) throw SerializeError("densenet: trailing bytes");
    return net;
}

void write_adam(BinWriter& w, const AdamState& s) {
    w.f64(s.learning_rate);
    w.f64(s.beta1);
    w.f64(s.beta2);
    w.f64(s.eps);
    w.u64(static_cast<uint64_t>(s.t));
    w.u32(static_cast<uint32_t>(s.m_w.size()));
    for (size_t l = 0; l < s.m_w.size(); ++l) {
        w.mat(s.m_w[l]);
        w.mat(s.v_w[l]);
        w.vec(s.m_b[l]);
        w.vec(s.v_b[l]);
    }
}

AdamState read_adam(BinReader& r) {
    AdamState s;
    s.learning_rate = r.f64();
    s.beta1 = r.f64();
    s.beta2 = r.f64();
    s.eps = r.f64();
    s.t = static_cast<int64_t>(r.u64());
    uint32_t n = r.u32();
    if (n > 1024) throw SerializeError("adam: bad layer count");
    for (uint32_t l = 0; l < n; ++l) {
        s.m_w.push_back(r.mat());
        s.v_w.push_back(r.mat());
        s.m_b.push_back(r.vec());
        s.v_b.push_back(r.vec());
    }
    return s;
}

}  // namespace rndkit
