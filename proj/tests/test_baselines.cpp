#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rndkit/baselines.hpp"
#include "rndkit/serialize.hpp"

using namespace rndkit;

namespace {

RndConfig tiny_config(int obs_dim) {
    RndConfig cfg;
    cfg.obs_dim = obs_dim;
    cfg.embedding_dim = 6;
    cfg.target_hidden = {12};
    cfg.predictor_hidden = {12, 12};
    cfg.learning_rate = 2e-3;
    return cfg;
}

void warm_rms(RunningMeanStd& rms, int dim, uint64_t seed, int rows = 256) {
    Rng rng(seed);
    Mat obs(rows, dim);
    for (auto& v : obs.a) v = rng.uniform(-1.0, 1.0);
    rms_update(rms, obs);
}

/// Cyclic shift by one cell per step, action ignored. Fully predictable.
Mat ring_obs(int n, int dim, int offset, Rng& rng) {
    (void)rng;
    Mat obs(n, dim);
    obs.fill(0.0);
    for (int i = 0; i < n; ++i) obs(i, (i + offset) % dim) = 1.0;
    return obs;
}

}  // namespace

TEST_CASE("dynamics bonus decays on a deterministic transition") {
    auto cfg = tiny_config(8);
    DynamicsBonus db(cfg, 3, 21);
    warm_rms(db.obs_rms, 8, 5);

    Rng rng(77);
    Mat obs = ring_obs(16, 8, 0, rng);
    Mat next = ring_obs(16, 8, 1, rng);
    std::vector<int> actions(16);
    for (auto& a : actions) a = static_cast<int>(rng.randint(3));

    Vec before = dynamics_bonus(db, obs, actions, next);
    double init = mean(before);
    CHECK(init > 0.0);
    for (int step = 0; step < 600; ++step) train_dynamics(db, obs, actions, next);
    double after = mean(dynamics_bonus(db, obs, actions, next));
    CHECK(after < 0.1 * init);
}

TEST_CASE("predictor rebuilt as the feature net gives exactly zero bonus") {
    auto cfg = tiny_config(5);
    cfg.target_hidden = {};
    cfg.predictor_hidden = {};
    DynamicsBonus db(cfg, 4, 3);
    warm_rms(db.obs_rms, 5, 9);

    // identity transitions plus a predictor whose action block is dead
    db.predictor.weights[0].fill(0.0);
    for (int r = 0; r < cfg.embedding_dim; ++r)
        for (int c = 0; c < 5; ++c) db.predictor.weights[0](r, c) = db.features.weights[0](r, c);
    db.predictor.biases[0] = db.features.biases[0];

    Rng rng(4);
    Mat obs(10, 5);
    for (auto& v : obs.a) v = rng.uniform(-2.0, 2.0);
    std::vector<int> actions(10);
    for (auto& a : actions) a = static_cast<int>(rng.randint(4));

    Vec b = dynamics_bonus(db, obs, actions, obs);
    for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("dynamics bonus keeps irreducible error on noise-driven transitions") {
    auto cfg = tiny_config(6);
    DynamicsBonus det(cfg, 2, 8);
    DynamicsBonus noisy(cfg, 2, 8);
    warm_rms(det.obs_rms, 6, 2);
    warm_rms(noisy.obs_rms, 6, 2);

    Rng rng(31);
    int batch = 32;
    auto make_obs = [&](bool noise_dims) {
        Mat next(batch, 6);
        next.fill(0.0);
        for (int i = 0; i < batch; ++i) {
            next(i, i % 4) = 1.0;
            if (noise_dims) {
                next(i, 4) = rng.uniform();
                next(i, 5) = rng.uniform();
            }
        }
        return next;
    };
    Mat obs(batch, 6);
    obs.fill(0.0);
    for (int i = 0; i < batch; ++i) obs(i, (i + 1) % 4) = 1.0;
    std::vector<int> actions(batch, 0);

    for (int step = 0; step < 900; ++step) {
        train_dynamics(det, obs, actions, make_obs(false));
        train_dynamics(noisy, obs, actions, make_obs(true));
    }
    double det_b = mean(dynamics_bonus(det, obs, actions, make_obs(false)));
    double noisy_b = mean(dynamics_bonus(noisy, obs, actions, make_obs(true)));
    CHECK(noisy_b > 5.0 * det_b);
}

TEST_CASE("dynamics rejects bad shapes and ranges") {
    auto cfg = tiny_config(4);
    DynamicsBonus db(cfg, 2, 1);
    warm_rms(db.obs_rms, 4, 1);
    Mat obs(3, 4);
    obs.fill(0.1);
    CHECK_THROWS_AS(dynamics_bonus(db, obs, {0, 1}, obs), ShapeError);
    CHECK_THROWS_AS(dynamics_bonus(db, obs, {0, 1, 2}, obs), std::invalid_argument);
    DynamicsBonus cold(cfg, 2, 1);
    CHECK_THROWS_AS(dynamics_bonus(cold, obs, {0, 1, 0}, obs), InvalidStateError);
    CHECK_THROWS_AS(DynamicsBonus(cfg, 0, 1), std::invalid_argument);
}

TEST_CASE("dynamics save/load round-trips behavior") {
    auto cfg = tiny_config(6);
    DynamicsBonus db(cfg, 3, 99);
    warm_rms(db.obs_rms, 6, 12);
    Rng rng(6);
    Mat obs(8, 6), next(8, 6);
    for (auto& v : obs.a) v = rng.uniform(-1.0, 1.0);
    for (auto& v : next.a) v = rng.uniform(-1.0, 1.0);
    std::vector<int> actions(8);
    for (auto& a : actions) a = static_cast<int>(rng.randint(3));
    for (int i = 0; i < 20; ++i) train_dynamics(db, obs, actions, next);

    BinWriter w;
    db.save(w);
    DynamicsBonus copy(cfg, 3, 0);
    BinReader r(w.data());
    copy.load(r);
    CHECK(r.at_end());

    Vec a = dynamics_bonus(db, obs, actions, next);
    Vec b = dynamics_bonus(copy, obs, actions, next);
    CHECK(a == b);
    CHECK(train_dynamics(db, obs, actions, next) == train_dynamics(copy, obs, actions, next));
}

TEST_CASE("autoencoder reconstructs a repeated observation") {
    auto cfg = tiny_config(6);
    cfg.learning_rate = 5e-3;
    AutoencoderBonus ae(cfg, 17);
    CHECK(ae.bottleneck == 3);
    warm_rms(ae.obs_rms, 6, 3);

    Rng rng(10);
    Mat one(1, 6);
    for (auto& v : one.a) v = rng.uniform(-1.0, 1.0);
    Mat batch(16, 6);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 6; ++j) batch(i, j) = one(0, j);

    double before = mean(autoencoder_bonus(ae, batch));
    CHECK(before > 0.0);
    for (int step = 0; step < 2500; ++step) train_autoencoder(ae, batch);
    CHECK(mean(autoencoder_bonus(ae, batch)) < 1e-3);
}

TEST_CASE("autoencoder scores fresh observations above trained ones") {
    auto cfg = tiny_config(8);
    cfg.learning_rate = 3e-3;
    AutoencoderBonus ae(cfg, 23);
    warm_rms(ae.obs_rms, 8, 14);

    Rng rng(15);
    Mat seen(32, 8), fresh(32, 8);
    for (auto& v : seen.a) v = rng.uniform(-1.0, 1.0);
    for (auto& v : fresh.a) v = rng.uniform(-1.0, 1.0);
    for (int step = 0; step < 1200; ++step) train_autoencoder(ae, seen);
    CHECK(mean(autoencoder_bonus(ae, fresh)) > mean(autoencoder_bonus(ae, seen)));
}

TEST_CASE("autoencoder save/load round-trips behavior") {
    auto cfg = tiny_config(4);
    AutoencoderBonus ae(cfg, 40);
    warm_rms(ae.obs_rms, 4, 4);
    Rng rng(8);
    Mat obs(8, 4);
    for (auto& v : obs.a) v = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) train_autoencoder(ae, obs);

    BinWriter w;
    ae.save(w);
    AutoencoderBonus copy(cfg, 0);
    BinReader r(w.data());
    copy.load(r);
    CHECK(r.at_end());
    CHECK(autoencoder_bonus(ae, obs) == autoencoder_bonus(copy, obs));
}

TEST_CASE("count bonus follows the inverse-sqrt formula exactly") {
    CountTable t;
    t.form = CountForm::InverseSqrtN;
    Vec got;
    for (int visit = 0; visit < 4; ++visit) {
        record_visit(t, 7);
        got.push_back(count_bonus(t, 7));
    }
    CHECK(got[0] == 1.0);
    CHECK(got[1] == 1.0 / std::sqrt(2.0));
    CHECK(got[2] == 1.0 / std::sqrt(3.0));
    CHECK(got[3] == 0.5);
}

TEST_CASE("count bonus 1/n after ten visits is exactly 0.1") {
    CountTable t;
    t.form = CountForm::InverseN;
    for (int i = 0; i < 10; ++i) record_visit(t, 2);
    CHECK(count_bonus(t, 2) == 0.1);
}

TEST_CASE("distinct states count independently") {
    CountTable t;
    t.form = CountForm::InverseN;
    for (int i = 0; i < 4; ++i) record_visit(t, 1);
    record_visit(t, 5);
    CHECK(count_bonus(t, 1) == 0.25);
    CHECK(count_bonus(t, 5) == 1.0);
}

TEST_CASE("never-visited state scores 1 without incrementing") {
    CountTable t;
    CHECK(count_bonus(t, 3) == 1.0);
    CHECK(count_bonus(t, 3) == 1.0);
    CHECK(t.counts.empty());
    record_visit(t, 3);
    record_visit(t, 3);
    CHECK(count_bonus(t, 3) == 1.0 / std::sqrt(2.0));
    CHECK_THROWS_AS(count_bonus(t, -1), std::invalid_argument);
    CHECK_THROWS_AS(record_visit(t, -2), std::invalid_argument);
}

TEST_CASE("count bonus wrapper records one visit per step per env") {
    CountBonus cb(3, 2, 0.99, true, CountForm::InverseSqrtN);
    Mat next(2, 3);
    next.fill(0.0);
    Vec b1 = cb.bonus(next, {0, 0}, next, {4, 4});
    CHECK(b1[0] == 1.0);
    CHECK(b1[1] == 1.0 / std::sqrt(2.0));  // same state reached by both envs
    Vec b2 = cb.bonus(next, {0, 0}, next, {4, 9});
    CHECK(b2[0] == 1.0 / std::sqrt(3.0));
    CHECK(b2[1] == 1.0);
    CHECK(cb.train_step(next, {0, 0}, next, {4, 9}) == 0.0);

    BinWriter w;
    cb.save(w);
    CountBonus copy(3, 2, 0.99, true);
    BinReader r(w.data());
    copy.load(r);
    CHECK(r.at_end());
    CHECK(copy.table.counts == cb.table.counts);
    CHECK(copy.kind() == "count");
}

TEST_CASE("count table serialization is byte-stable across insertion orders") {
    CountTable a, b;
    for (int s : {9, 1, 5, 1, 9, 9}) record_visit(a, s);
    for (int s : {1, 9, 9, 5, 1, 9}) record_visit(b, s);
    BinWriter wa, wb;
    write_count_table(wa, a);
    write_count_table(wb, b);
    CHECK(wa.data() == wb.data());
    BinReader r(wa.data());
    CountTable back = read_count_table(r);
    CHECK(back.counts == a.counts);
    CHECK(back.form == a.form);
}

TEST_CASE("zero bonus stub is identically zero and trains to nothing") {
    ZeroBonus zb(4, 2, 0.99, true);
    Mat obs(2, 4);
    obs.fill(1.0);
    Vec b = zb.bonus(obs, {0, 1}, obs, {0, 1});
    CHECK(b == Vec(2, 0.0));
    CHECK(zb.train_step(obs, {0, 1}, obs, {0, 1}) == 0.0);
    CHECK(zb.kind() == "none");
}
