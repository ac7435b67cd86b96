#include "tacnog/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "tacnog/errors.hpp"

namespace tacnog {

namespace {

void check_arch(const std::vector<std::size_t>& arch) {
    if (arch.size() < 2 || arch.front() != 3 || arch.back() != 1 ||
        std::any_of(arch.begin(), arch.end(), [](std::size_t n) { return n == 0; }))
        throw ConfigError("network architecture must map 3 inputs to 1 output");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t bits_of(double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof b);
    return b;
}

double unit_hash(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Forward pass keeping every layer's post-activation; acts[0] is the normalized input.
double forward_cached(const PolicyNetwork& net, const ExtremalState& z, std::vector<std::vector<double>>& acts) {
    const auto in = encode_input(z, net.encoding, net.horizon);
    acts.resize(net.layers.size() + 1);
    acts[0].assign(3, 0.0);
    for (int k = 0; k < 3; ++k) acts[0][k] = (in[k] - net.input_shift[k]) / net.input_scale[k];
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& L = net.layers[l];
        const bool hidden = l + 1 < net.layers.size();
        auto& a = acts[l + 1];
        a.assign(L.out, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            double s = L.b[o];
            const double* w = &L.W[o * L.in];
            for (std::size_t i = 0; i < L.in; ++i) s += w[i] * acts[l][i];
            a[o] = hidden ? std::tanh(s) : s;
        }
    }
    return acts.back()[0];
}

std::vector<DenseLayer> zero_like(const PolicyNetwork& net) {
    std::vector<DenseLayer> g = net.layers;
    for (auto& L : g) {
        std::fill(L.W.begin(), L.W.end(), 0.0);
        std::fill(L.b.begin(), L.b.end(), 0.0);
    }
    return g;
}

}  // namespace

PolicyNetwork PolicyNetwork::zeros(double horizon, const std::vector<std::size_t>& arch) {
    check_arch(arch);
    PolicyNetwork net;
    net.arch = arch;
    net.horizon = horizon;
    for (std::size_t l = 0; l + 1 < arch.size(); ++l)
        net.layers.push_back({arch[l], arch[l + 1], std::vector<double>(arch[l] * arch[l + 1], 0.0),
                              std::vector<double>(arch[l + 1], 0.0)});
    return net;
}

PolicyNetwork PolicyNetwork::random(double horizon, std::uint64_t seed, const std::vector<std::size_t>& arch) {
    PolicyNetwork net = zeros(horizon, arch);
    std::mt19937_64 rng(seed);
    for (auto& L : net.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : L.W) w = dist(rng);
    }
    return net;
}

std::size_t PolicyNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& L : layers) n += L.W.size() + L.b.size();
    return n;
}

std::string to_string(InputEncoding e) { return e == InputEncoding::cartesian ? "cartesian" : "reach_polar"; }

InputEncoding parse_encoding(const std::string& s) {
    if (s == "cartesian") return InputEncoding::cartesian;
    if (s == "reach_polar") return InputEncoding::reach_polar;
    throw ConfigError("unknown input encoding '" + s + "'");
}

std::array<double, 3> encode_input(const ExtremalState& z, InputEncoding enc, double horizon) {
    if (enc == InputEncoding::cartesian)
        return {z[0], z[1], kCanonicalFinalHeading + wrap_angle(z[2] - kCanonicalFinalHeading)};
    const double r = std::hypot(z[0], z[1]);
    const double los = std::atan2(-z[1], -z[0]);
    return {std::sqrt(std::max(horizon - r, 0.0)), wrap_angle(los - kCanonicalFinalHeading), wrap_angle(z[2] - los)};
}

double net_forward(const PolicyNetwork& net, const ExtremalState& z) {
    thread_local std::vector<std::vector<double>> acts;
    return net.output_scale * forward_cached(net, z, acts) + net.output_shift;
}

double feedback_control(const PolicyNetwork& net, double t_go, const EngagementState& z_c) {
    if (!(t_go > 0.0)) throw ExpiredHorizon("time-to-go must be positive");
    const double lambda = net.horizon / t_go;
    return lambda * net_forward(net, {lambda * z_c.x, lambda * z_c.y, z_c.theta});
}

double batch_loss_and_gradient(const PolicyNetwork& net, std::span<const DatasetRecord> batch,
                               std::vector<DenseLayer>& grad) {
    grad = zero_like(net);
    if (batch.empty()) return 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<std::vector<double>> acts;
    std::vector<double> delta;
    std::vector<double> prev;
    double loss = 0.0;
    for (const auto& r : batch) {
        const double y = forward_cached(net, r.state, acts);
        const double e = y - (r.control - net.output_shift) / net.output_scale;
        loss += e * e;
        delta.assign(1, 2.0 * e * inv_n);
        for (std::size_t l = net.layers.size(); l-- > 0;) {
            const DenseLayer& L = net.layers[l];
            DenseLayer& G = grad[l];
            const auto& a_in = acts[l];
            for (std::size_t o = 0; o < L.out; ++o) {
                G.b[o] += delta[o];
                double* gw = &G.W[o * L.in];
                for (std::size_t i = 0; i < L.in; ++i) gw[i] += delta[o] * a_in[i];
            }
            if (l == 0) break;
            prev.assign(L.in, 0.0);
            for (std::size_t o = 0; o < L.out; ++o) {
                const double* w = &L.W[o * L.in];
                for (std::size_t i = 0; i < L.in; ++i) prev[i] += w[i] * delta[o];
            }
            for (std::size_t i = 0; i < L.in; ++i) prev[i] *= 1.0 - a_in[i] * a_in[i];
            delta.swap(prev);
        }
    }
    return loss * inv_n;
}

double batch_loss(const PolicyNetwork& net, std::span<const DatasetRecord> batch) {
    if (batch.empty()) return 0.0;
    std::vector<std::vector<double>> acts;
    double loss = 0.0;
    for (const auto& r : batch) {
        const double e = forward_cached(net, r.state, acts) - (r.control - net.output_shift) / net.output_scale;
        loss += e * e;
    }
    return loss / static_cast<double>(batch.size());
}

double rmse(const PolicyNetwork& net, std::span<const DatasetRecord> records) {
    if (records.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : records) {
        const double e = net_forward(net, r.state) - r.control;
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(records.size()));
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ConfigError("validation fraction must lie in (0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(min_range >= 0.0)) throw ConfigError("min range must be non-negative");
    check_arch(arch);
}

void split_dataset(const std::vector<DatasetRecord>& data, double validation_fraction,
                   std::vector<DatasetRecord>& train_set, std::vector<DatasetRecord>& validation) {
    auto by = [&](auto&& key) {
        train_set.clear();
        validation.clear();
        for (std::size_t i = 0; i < data.size(); ++i)
            (unit_hash(key(i)) < validation_fraction ? validation : train_set).push_back(data[i]);
    };
    by([&](std::size_t i) {
        const auto& q = data[i].q;
        return splitmix64(bits_of(q.px) ^ splitmix64(bits_of(q.py) ^ splitmix64(bits_of(q.c0))));
    });
    if (train_set.empty() || validation.empty()) by([](std::size_t i) { return splitmix64(i); });
}

TrainResult train(const std::vector<DatasetRecord>& data, const TrainConfig& cfg, double horizon) {
    cfg.validate();
    std::vector<DatasetRecord> kept;
    for (const auto& r : data)
        if (std::hypot(r.state[0], r.state[1]) >= cfg.min_range) kept.push_back(r);
    if (kept.empty()) throw ConfigError("training dataset is empty");
    std::vector<DatasetRecord> tr;
    std::vector<DatasetRecord> va;
    split_dataset(kept, cfg.validation_fraction, tr, va);
    if (tr.size() < cfg.batch_size) throw ConfigError("training split is smaller than the batch size");

    PolicyNetwork net = PolicyNetwork::random(horizon, cfg.seed, cfg.arch);
    net.encoding = cfg.encoding;
    {
        std::array<double, 3> mean{};
        std::array<double, 3> sq{};
        double um = 0.0;
        double us = 0.0;
        for (const auto& r : tr) {
            const auto x = encode_input(r.state, net.encoding, horizon);
            for (int k = 0; k < 3; ++k) mean[k] += x[k];
            um += r.control;
        }
        const double n = static_cast<double>(tr.size());
        for (auto& m : mean) m /= n;
        um /= n;
        for (const auto& r : tr) {
            const auto x = encode_input(r.state, net.encoding, horizon);
            for (int k = 0; k < 3; ++k) sq[k] += (x[k] - mean[k]) * (x[k] - mean[k]);
            us += (r.control - um) * (r.control - um);
        }
        for (int k = 0; k < 3; ++k) {
            const double sd = std::sqrt(sq[k] / n);
            net.input_shift[k] = mean[k];
            net.input_scale[k] = sd > 1e-12 ? sd : 1.0;
        }
        const double usd = std::sqrt(us / n);
        net.output_shift = um;
        net.output_scale = usd > 1e-12 ? usd : 1.0;
    }

    TrainResult res;
    res.train_size = tr.size();
    res.validation_size = va.size();
    res.net = net;
    res.best_validation_rmse = rmse(net, va);

    std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
    std::vector<std::size_t> order(tr.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<DenseLayer> velocity = zero_like(net);
    std::vector<DenseLayer> second = zero_like(net);
    std::size_t updates = 0;
    std::vector<DenseLayer> grad;
    std::vector<DatasetRecord> batch;
    batch.reserve(cfg.batch_size);
    double lr = cfg.learning_rate;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (epoch > 0 && cfg.decay_every > 0 && epoch % cfg.decay_every == 0) lr *= cfg.lr_decay;
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start + cfg.batch_size <= order.size(); start += cfg.batch_size) {
            batch.clear();
            for (std::size_t k = start; k < start + cfg.batch_size; ++k) batch.push_back(tr[order[k]]);
            epoch_loss += batch_loss_and_gradient(net, batch, grad);
            ++batches;
            ++updates;
            const double bc1 = 1.0 - std::pow(cfg.momentum, static_cast<double>(updates));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(updates));
            auto step = [&](std::vector<double>& w, std::vector<double>& v, std::vector<double>& s2,
                            const std::vector<double>& g) {
                if (cfg.optimizer == Optimizer::sgd_momentum) {
                    for (std::size_t i = 0; i < w.size(); ++i) {
                        v[i] = cfg.momentum * v[i] - lr * g[i];
                        w[i] += v[i];
                    }
                    return;
                }
                for (std::size_t i = 0; i < w.size(); ++i) {
                    v[i] = cfg.momentum * v[i] + (1.0 - cfg.momentum) * g[i];
                    s2[i] = cfg.beta2 * s2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                    w[i] -= lr * (v[i] / bc1) / (std::sqrt(s2[i] / bc2) + 1e-8);
                }
            };
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                step(net.layers[l].W, velocity[l].W, second[l].W, grad[l].W);
                step(net.layers[l].b, velocity[l].b, second[l].b, grad[l].b);
            }
        }
        res.train_loss.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1)));
        const double v = rmse(net, va);
        res.validation_rmse.push_back(v);
        if (v < res.best_validation_rmse) {
            res.best_validation_rmse = v;
            res.best_epoch = epoch + 1;
            res.net = net;
        }
        res.best_rmse.push_back(res.best_validation_rmse);
    }
    return res;
}

nlohmann::json network_to_json(const PolicyNetwork& net) {
    using nlohmann::json;
    json layers = json::array();
    for (const auto& L : net.layers) {
        json W = json::array();
        for (std::size_t o = 0; o < L.out; ++o)
            W.push_back(std::vector<double>(L.W.begin() + static_cast<long>(o * L.in),
                                            L.W.begin() + static_cast<long>((o + 1) * L.in)));
        layers.push_back({{"W", W}, {"b", L.b}});
    }
    return {{"arch", net.arch},
            {"activation", net.activation},
            {"input_encoding", to_string(net.encoding)},
            {"T", net.horizon},
            {"input_norm", {{"shift", net.input_shift}, {"scale", net.input_scale}}},
            {"output_norm", {{"shift", net.output_shift}, {"scale", net.output_scale}}},
            {"layers", layers}};
}

PolicyNetwork network_from_json(const nlohmann::json& j) {
    try {
        const auto arch = j.at("arch").get<std::vector<std::size_t>>();
        try {
            check_arch(arch);
        } catch (const ConfigError& e) {
            throw LoadError(e.what());
        }
        if (j.at("activation").get<std::string>() != "tanh") throw LoadError("unsupported activation");
        PolicyNetwork net = PolicyNetwork::zeros(j.at("T").get<double>(), arch);
        if (j.contains("input_encoding")) {
            try {
                net.encoding = parse_encoding(j.at("input_encoding").get<std::string>());
            } catch (const ConfigError& e) {
                throw LoadError(e.what());
            }
        }
        net.input_shift = j.at("input_norm").at("shift").get<std::array<double, 3>>();
        net.input_scale = j.at("input_norm").at("scale").get<std::array<double, 3>>();
        net.output_shift = j.at("output_norm").at("shift").get<double>();
        net.output_scale = j.at("output_norm").at("scale").get<double>();
        const auto& layers = j.at("layers");
        if (layers.size() != net.layers.size()) throw LoadError("layer count does not match arch");
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            DenseLayer& L = net.layers[l];
            const auto W = layers[l].at("W").get<std::vector<std::vector<double>>>();
            const auto b = layers[l].at("b").get<std::vector<double>>();
            if (W.size() != L.out || b.size() != L.out) throw LoadError("layer shape does not match arch");
            for (std::size_t o = 0; o < L.out; ++o) {
                if (W[o].size() != L.in) throw LoadError("layer shape does not match arch");
                std::copy(W[o].begin(), W[o].end(), L.W.begin() + static_cast<long>(o * L.in));
            }
            L.b = b;
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("weights json: ") + e.what());
    }
}

void save_weights(const std::filesystem::path& path, const PolicyNetwork& net) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weights " + path.string());
    out << network_to_json(net).dump() << '\n';
}

PolicyNetwork load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weights " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return network_from_json(j);
}

}  // namespace tacnog
