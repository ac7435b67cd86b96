#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "tacnog/dataset.hpp"
#include "tacnog/errors.hpp"
#include "tacnog/policy_net.hpp"

using namespace tacnog;

namespace {

// Straightforward evaluation from the stored weights.
double reference_forward(const PolicyNetwork& net, const ExtremalState& z) {
    const auto e = encode_input(z, net.encoding, net.horizon);
    std::vector<double> a(3);
    for (int i = 0; i < 3; ++i) a[i] = (e[i] - net.input_shift[i]) / net.input_scale[i];
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& L = net.layers[l];
        std::vector<double> next(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            double s = L.b[o];
            for (std::size_t i = 0; i < L.in; ++i) s += L.W[o * L.in + i] * a[i];
            next[o] = l + 1 < net.layers.size() ? std::tanh(s) : s;
        }
        a = next;
    }
    return a[0] * net.output_scale + net.output_shift;
}

PolicyNetwork jittered(std::uint64_t seed) {
    auto net = PolicyNetwork::random(1.5, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    for (auto& L : net.layers)
        for (auto& b : L.b) b = d(rng);
    net.input_shift = {0.1, 0.7, -1.0};
    net.input_scale = {0.8, 0.5, 1.7};
    net.output_shift = 0.2;
    net.output_scale = 3.0;
    return net;
}

std::vector<DatasetRecord> small_data() {
    SweepConfig cfg;
    cfg.p_max = 3.0;
    cfg.step_q = 0.5;
    cfg.h = 1e-2;
    return generate_dataset(cfg).records;
}

}  // namespace

TEST_CASE("input encodings") {
    const auto c = encode_input({0.3, -0.4, kPi});
    CHECK(c[0] == 0.3);
    CHECK(c[1] == -0.4);
    CHECK(c[2] == doctest::Approx(-kPi));
    const auto c2 = encode_input({0, 0, 2.0});
    CHECK(c2[2] == doctest::Approx(2.0 - 2 * kPi));
    CHECK(encode_input({0, 0, kPi / 2})[2] == doctest::Approx(kPi / 2));

    // Straight-line approach from due north: slack, line of sight and relative heading all vanish.
    const auto p = encode_input({0, 1.5, -kPi / 2}, InputEncoding::reach_polar, 1.5);
    CHECK(p[0] == doctest::Approx(0.0));
    CHECK(std::abs(p[1]) < 1e-12);
    CHECK(std::abs(p[2]) < 1e-12);
    const auto q = encode_input({1.0, 0.0, 0.0}, InputEncoding::reach_polar, 1.5);
    CHECK(q[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(q[1] == doctest::Approx(-kPi / 2));
    CHECK(std::abs(q[2]) == doctest::Approx(kPi));
    CHECK(encode_input({3, 0, 0}, InputEncoding::reach_polar, 1.5)[0] == 0.0);

    CHECK(parse_encoding("reach_polar") == InputEncoding::reach_polar);
    CHECK(to_string(InputEncoding::cartesian) == "cartesian");
    CHECK_THROWS_AS(parse_encoding("polar"), ConfigError);
}

TEST_CASE("forward pass matches a direct evaluation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (auto enc : {InputEncoding::cartesian, InputEncoding::reach_polar}) {
        auto net = jittered(11);
        net.encoding = enc;
        for (int i = 0; i < 50; ++i) {
            const ExtremalState z{d(rng), d(rng), 2 * d(rng)};
            CHECK(net_forward(net, z) == doctest::Approx(reference_forward(net, z)).epsilon(1e-13));
        }
    }
    auto zero = PolicyNetwork::zeros(1.5);
    zero.output_shift = 0.37;
    CHECK(net_forward(zero, {0.1, 0.2, 0.3}) == 0.37);
    CHECK(zero.parameter_count() == 3 * 20 + 20 + 20 * 20 + 20 + 20 + 1);
}

TEST_CASE("time-to-go scaling of the feedback law") {
    const auto net = jittered(3);
    const auto z = EngagementState::make(0.4, 0.6, -1.2);
    CHECK(feedback_control(net, 1.5, z) == doctest::Approx(net_forward(net, {0.4, 0.6, -1.2})));
    for (double lam : {0.5, 2.0, 7.0}) {
        const double u = feedback_control(net, 1.5 / lam, z);
        CHECK(u == doctest::Approx(lam * net_forward(net, {lam * 0.4, lam * 0.6, -1.2})).epsilon(1e-12));
    }
    CHECK_THROWS_AS(feedback_control(net, 0.0, z), ExpiredHorizon);
    CHECK_THROWS_AS(feedback_control(net, -1.0, z), ExpiredHorizon);
}

TEST_CASE("backpropagation matches finite differences") {
    const auto data = small_data();
    REQUIRE(data.size() > 40);
    for (auto enc : {InputEncoding::cartesian, InputEncoding::reach_polar}) {
        auto net = jittered(21);
        net.encoding = enc;
        std::span<const DatasetRecord> batch(data.data(), 32);
        std::vector<DenseLayer> grad;
        batch_loss_and_gradient(net, batch, grad);
        REQUIRE(grad.size() == net.layers.size());
        double worst = 0.0;
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            for (std::size_t k = 0; k < net.layers[l].W.size(); k += 13) {
                auto p = net, m = net;
                p.layers[l].W[k] += 1e-6;
                m.layers[l].W[k] -= 1e-6;
                const double fd = (batch_loss(p, batch) - batch_loss(m, batch)) / 2e-6;
                worst = std::max(worst, std::abs(fd - grad[l].W[k]) / std::max(1.0, std::abs(fd)));
            }
            for (std::size_t k = 0; k < net.layers[l].b.size(); k += 3) {
                auto p = net, m = net;
                p.layers[l].b[k] += 1e-6;
                m.layers[l].b[k] -= 1e-6;
                const double fd = (batch_loss(p, batch) - batch_loss(m, batch)) / 2e-6;
                worst = std::max(worst, std::abs(fd - grad[l].b[k]) / std::max(1.0, std::abs(fd)));
            }
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("rmse is in physical units") {
    auto net = PolicyNetwork::zeros(1.5);
    net.output_shift = 0.5;
    std::vector<DatasetRecord> recs(4);
    for (int i = 0; i < 4; ++i) recs[i].control = i % 2 ? 1.5 : -0.5;
    CHECK(rmse(net, recs) == doctest::Approx(1.0));
}

TEST_CASE("split is deterministic and disjoint") {
    const auto data = small_data();
    std::vector<DatasetRecord> tr, va, tr2, va2;
    split_dataset(data, 0.1, tr, va);
    split_dataset(data, 0.1, tr2, va2);
    CHECK(tr == tr2);
    CHECK(va == va2);
    CHECK(tr.size() + va.size() == data.size());
    CHECK(va.size() > 0);
    const double frac = static_cast<double>(va.size()) / static_cast<double>(data.size());
    CHECK(frac > 0.04);
    CHECK(frac < 0.2);
    for (const auto& v : va)
        for (const auto& t : tr) REQUIRE_FALSE(v.q == t.q);
}

TEST_CASE("training reduces the loss and is reproducible") {
    const auto data = small_data();
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.01;
    cfg.seed = 4;
    cfg.optimizer = Optimizer::adam;
    const auto a = train(data, cfg, 1.5);
    CHECK(a.train_loss.size() == 15);
    CHECK(a.train_loss.back() < a.train_loss.front());
    for (std::size_t i = 1; i < a.best_rmse.size(); ++i) CHECK(a.best_rmse[i] <= a.best_rmse[i - 1]);
    CHECK(a.best_validation_rmse == a.best_rmse.back());
    CHECK(a.train_size + a.validation_size == data.size());
    const auto b = train(data, cfg, 1.5);
    CHECK(b.best_validation_rmse == a.best_validation_rmse);
    CHECK(network_to_json(b.net) == network_to_json(a.net));

    cfg.optimizer = Optimizer::sgd_momentum;
    cfg.learning_rate = 0.02;
    cfg.encoding = InputEncoding::reach_polar;
    cfg.min_range = 0.3;
    const auto c = train(data, cfg, 1.5);
    CHECK(c.net.encoding == InputEncoding::reach_polar);
    CHECK(c.train_loss.back() < c.train_loss.front());
    CHECK(c.train_size + c.validation_size < data.size());
}

TEST_CASE("training configuration errors") {
    const auto data = small_data();
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train(data, cfg, 1.5), ConfigError);
    cfg = {};
    cfg.batch_size = data.size() * 2;
    CHECK_THROWS_AS(train(data, cfg, 1.5), ConfigError);
    cfg = {};
    cfg.validation_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.min_range = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.arch = {2, 20, 1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("weights JSON round trip and schema errors") {
    auto net = jittered(8);
    net.encoding = InputEncoding::reach_polar;
    const auto path = std::filesystem::temp_directory_path() / "tacnog_test_weights.json";
    save_weights(path, net);
    const auto back = load_weights(path);
    std::filesystem::remove(path);
    CHECK(back.encoding == InputEncoding::reach_polar);
    CHECK(back.horizon == 1.5);
    for (double x : {-1.0, 0.0, 0.7})
        CHECK(net_forward(back, {x, 0.5, 0.3}) == net_forward(net, {x, 0.5, 0.3}));

    auto j = network_to_json(net);
    CHECK(j.at("arch") == nlohmann::json::array({3, 20, 20, 1}));
    auto legacy = j;
    legacy.erase("input_encoding");
    CHECK(network_from_json(legacy).encoding == InputEncoding::cartesian);

    auto bad = j;
    bad["arch"] = {3, 10, 1};
    CHECK_THROWS_AS(network_from_json(bad), LoadError);
    bad = j;
    bad["activation"] = "relu";
    CHECK_THROWS_AS(network_from_json(bad), LoadError);
    bad = j;
    bad["input_encoding"] = "spherical";
    CHECK_THROWS_AS(network_from_json(bad), LoadError);
    bad = j;
    bad["layers"][1]["b"] = std::vector<double>(3, 0.0);
    CHECK_THROWS_AS(network_from_json(bad), LoadError);
    bad = j;
    bad.erase("output_norm");
    CHECK_THROWS_AS(network_from_json(bad), LoadError);
    CHECK_THROWS_AS(load_weights("/nonexistent/w.json"), IoError);
}

TEST_CASE("constant straight-line data is fitted") {
    SweepConfig cfg;
    const auto rec = evaluate_point({0, 0, 0}, cfg).record;
    const std::vector<DatasetRecord> data(100, rec);
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 16;
    const auto r = train(data, tc, 1.5);
    CHECK(r.validation_size > 0);
    CHECK(r.best_validation_rmse < 1e-3);
    for (double d : {0.1, 0.9, 4.0})
        CHECK(std::abs(feedback_control(r.net, d, EngagementState::make(0, d, -kPi / 2))) < 1e-3 * 1.5 / d);
}
