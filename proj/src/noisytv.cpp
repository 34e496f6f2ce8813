#include "rndkit/noisytv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>

#include "rndkit/baselines.hpp"
#include "rndkit/envs.hpp"
#include "rndkit/rnd.hpp"
#include "rndkit/trainer.hpp"

namespace rndkit {

double TileContrast::ratio() const { return noisy_bonus / std::max(det_bonus, 1e-12); }

double median_ratio(const std::vector<TileContrast>& rows) {
    if (rows.empty()) throw std::invalid_argument("median_ratio: no rows");
    std::vector<double> r;
    r.reserve(rows.size());
    for (const auto& row : rows) r.push_back(row.ratio());
    std::sort(r.begin(), r.end());
    size_t n = r.size();
    return n % 2 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
}

namespace {

struct TransitionPool {
    Mat obs{0, 0};
    Mat next_obs{0, 0};
    std::vector<int> actions;
    std::vector<int> tile_rows;  // transitions that start and end inside the noisy room
};

int room_of_obs(const Mat& obs, int row, int num_rooms) {
    for (int r = 0; r < num_rooms; ++r)
        if (obs(row, r) > 0.5) return r;
    return -1;
}

// Random-walk transitions. Episode-boundary steps are dropped so every
// stored next_obs really is the observation of the stored reached state.
TransitionPool collect_walk(const CorridorConfig& env_cfg, int steps, int noisy_room,
                            uint64_t seed) {
    const int walkers = 4;
    VecEnv env(env_cfg, walkers);
    Rng root(seed);
    Mat obs = env.reset(root.split("reset").seed());
    Rng act_rng = root.split("actions");

    const int d = env.obs_dim();
    std::vector<double> obs_buf, next_buf;
    std::vector<int> actions;
    std::vector<uint8_t> inside;
    int rounds = (steps + walkers - 1) / walkers;
    for (int t = 0; t < rounds; ++t) {
        std::vector<int> acts(walkers);
        for (int e = 0; e < walkers; ++e) acts[e] = act_rng.randint(env.num_actions());
        StepResult res = env.step(acts);
        for (int e = 0; e < walkers; ++e) {
            if (res.done[e]) continue;
            int from_room = room_of_obs(obs, e, env_cfg.num_rooms);
            int to_room = res.visited_index[e] / env_cfg.room_width;
            for (int j = 0; j < d; ++j) obs_buf.push_back(obs(e, j));
            for (int j = 0; j < d; ++j) next_buf.push_back(res.obs(e, j));
            actions.push_back(acts[e]);
            inside.push_back(from_room == noisy_room && to_room == noisy_room ? 1 : 0);
        }
        obs = res.obs;
    }

    TransitionPool pool;
    int n = static_cast<int>(actions.size());
    pool.obs = Mat(n, d);
    pool.obs.a = std::move(obs_buf);
    pool.next_obs = Mat(n, d);
    pool.next_obs.a = std::move(next_buf);
    pool.actions = std::move(actions);
    for (int i = 0; i < n; ++i)
        if (inside[i]) pool.tile_rows.push_back(i);
    return pool;
}

std::vector<int> pick(const std::vector<int>& v, const std::vector<int>& idx) {
    std::vector<int> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

double mean_of(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Endless random walk handing out never-reused transitions that start and
// end inside the noisy room. Batches drawn from it are always fresh data,
// the way an agent parked in front of the noisy tile sees a new frame on
// every visit.
class TileStream {
  public:
    TileStream(const CorridorConfig& env_cfg, int noisy_room, uint64_t seed)
        : env_(env_cfg, 4),
          root_(seed),
          act_rng_(root_.split("actions")),
          noisy_room_(noisy_room),
          num_rooms_(env_cfg.num_rooms),
          width_(env_cfg.room_width) {
        obs_ = env_.reset(root_.split("reset").seed());
    }

    // n fresh in-tile rows
    void next_batch(int n, Mat* obs, Mat* next_obs, std::vector<int>* actions) {
        int64_t guard = 0;
        while (static_cast<int>(rows_.size()) < n) {
            step_once();
            if (++guard > 2'000'000)
                throw std::runtime_error(
                    "noisytv: random walk starves the tile stream; check the env layout");
        }
        const int d = env_.obs_dim();
        *obs = Mat(n, d);
        *next_obs = Mat(n, d);
        actions->assign(n, 0);
        for (int at = 0; at < n; ++at) {
            Row& r = rows_.front();
            std::copy(r.obs.begin(), r.obs.end(), obs->row(at));
            std::copy(r.next.begin(), r.next.end(), next_obs->row(at));
            (*actions)[at] = r.action;
            rows_.pop_front();
        }
    }

  private:
    struct Row {
        std::vector<double> obs, next;
        int action;
    };

    void step_once() {
        const int d = env_.obs_dim();
        std::vector<int> acts(env_.num_envs());
        for (auto& a : acts) a = act_rng_.randint(env_.num_actions());
        StepResult res = env_.step(acts);
        for (int e = 0; e < env_.num_envs(); ++e) {
            if (res.done[e]) continue;
            if (room_of_obs(obs_, e, num_rooms_) != noisy_room_) continue;
            if (res.visited_index[e] / width_ != noisy_room_) continue;
            if (rows_.size() > 8192) continue;  // plenty buffered already
            Row r;
            r.obs.assign(obs_.row(e), obs_.row(e) + d);
            r.next.assign(res.obs.row(e), res.obs.row(e) + d);
            r.action = acts[e];
            rows_.push_back(std::move(r));
        }
        obs_ = res.obs;
    }

    VecEnv env_;
    Rng root_, act_rng_;
    Mat obs_{0, 0};
    int noisy_room_, num_rooms_, width_;
    std::deque<Row> rows_;
};

struct SeedContrast {
    TileContrast rnd, dynamics;
};

// Overwrite the noise channels of every row with the frozen frame.
void freeze_noise(Mat* m, int noise_at, const std::vector<double>& frame) {
    for (int i = 0; i < m->rows; ++i) {
        double* row = m->row(i);
        for (size_t j = 0; j < frame.size(); ++j) row[noise_at + j] = frame[j];
    }
}

// The matched deterministic tile is the noisy tile with its screen frozen:
// identical visit distribution, identical input support, identical data
// volume and optimizer — the only difference left is whether the signal is
// fresh each visit. Both models train on the honest stream and its frozen
// mirror in the same balanced batches.
SeedContrast contrast_for_seed(const ExperimentConfig& cfg, uint64_t seed) {
    const auto& nt = cfg.noisytv;
    const int noisy = cfg.env.noisy_room;
    const int noise_at = cfg.env.num_rooms + 1;

    Rng root(seed);
    std::vector<double> frame(cfg.env.d_noise);
    Rng frame_rng = root.split("frozen-frame");
    for (auto& v : frame) v = frame_rng.uniform();

    TransitionPool warm_pool =
        collect_walk(cfg.env, nt.replay_pool_steps, noisy, root.split("warmup-walk").seed());
    TransitionPool eval_pool =
        collect_walk(cfg.env, nt.replay_pool_steps, noisy, root.split("eval-walk").seed());
    if (warm_pool.tile_rows.empty() || eval_pool.tile_rows.empty())
        throw std::runtime_error(
            "noisytv: random walks never crossed the noisy room; raise replay_pool_steps");

    RndConfig rc;
    rc.obs_dim = cfg.env.obs_dim();
    rc.embedding_dim = cfg.embedding_dim;
    rc.target_hidden = cfg.target_hidden;
    rc.predictor_hidden = cfg.predictor_hidden;
    rc.learning_rate = cfg.bonus_learning_rate;
    rc.keep_prob = 1.0;  // the stream is already the data budget
    rc.num_envs = 1;
    rc.gamma_i = cfg.gamma_i;
    rc.centered_return_std = cfg.centered_return_std;

    RndBonus rnd(rc, root.split("rnd-model").seed());
    DynamicsBonus dyn(rc, kNumActions, root.split("dynamics-model").seed());
    // shared, frozen whitening from the warm-up walk for both models
    for (BonusModel* m : {static_cast<BonusModel*>(&rnd), static_cast<BonusModel*>(&dyn)}) {
        rms_update(m->obs_rms, warm_pool.obs);
        rms_update(m->obs_rms, warm_pool.next_obs);
    }

    // balanced fresh batches, identical row streams for both models; the
    // second half of each batch is the frozen mirror of more fresh rows
    TileStream stream(cfg.env, noisy, root.split("stream").seed());
    const int b_noisy = nt.batch_size / 2;
    const int b_det = nt.batch_size - b_noisy;
    Mat ob, nb;
    std::vector<int> ab;
    for (int step = 0; step < nt.train_steps; ++step) {
        stream.next_batch(b_noisy + b_det, &ob, &nb, &ab);
        Mat ob_det(b_det, ob.cols), nb_det(b_det, nb.cols);
        for (int i = 0; i < b_det; ++i) {
            std::copy(ob.row(b_noisy + i), ob.row(b_noisy + i) + ob.cols, ob_det.row(i));
            std::copy(nb.row(b_noisy + i), nb.row(b_noisy + i) + nb.cols, nb_det.row(i));
        }
        freeze_noise(&ob_det, noise_at, frame);
        freeze_noise(&nb_det, noise_at, frame);
        for (int i = 0; i < b_det; ++i) {
            std::copy(ob_det.row(i), ob_det.row(i) + ob.cols, ob.row(b_noisy + i));
            std::copy(nb_det.row(i), nb_det.row(i) + nb.cols, nb.row(b_noisy + i));
        }
        std::vector<int> dummy_state(ab.size(), 0);
        rnd.train_step(ob, ab, nb, dummy_state);
        dyn.train_step(ob, ab, nb, dummy_state);
    }

    // paired evaluation: the same fresh transitions, once as seen and once
    // with the screen frozen
    Mat eo = take_rows(eval_pool.obs, eval_pool.tile_rows);
    Mat en = take_rows(eval_pool.next_obs, eval_pool.tile_rows);
    std::vector<int> ea = pick(eval_pool.actions, eval_pool.tile_rows);
    Mat eo_det = eo, en_det = en;
    freeze_noise(&eo_det, noise_at, frame);
    freeze_noise(&en_det, noise_at, frame);

    SeedContrast out;
    out.rnd.seed = out.dynamics.seed = seed;
    out.rnd.noisy_bonus = mean_of(intrinsic_reward(rnd, en));
    out.rnd.det_bonus = mean_of(intrinsic_reward(rnd, en_det));
    out.dynamics.noisy_bonus = mean_of(dynamics_bonus(dyn, eo, ea, en));
    out.dynamics.det_bonus = mean_of(dynamics_bonus(dyn, eo_det, ea, en_det));
    return out;
}

double agent_occupancy(const ExperimentConfig& base, const std::string& bonus_kind,
                       uint64_t seed) {
    ExperimentConfig cfg = base;
    cfg.seed = seed;
    cfg.bonus_kind = bonus_kind;
    cfg.updates = base.noisytv.agent_updates;
    cfg.snapshot_interval = 0;

    Trainer t(cfg);
    int half = std::max(1, cfg.updates / 2);
    for (int u = 0; u < half; ++u) t.run_update();
    int64_t visits0 = t.noisy_visits;
    int64_t frames0 = t.frames;
    for (int u = half; u < cfg.updates; ++u) t.run_update();
    int64_t dv = t.noisy_visits - visits0;
    int64_t df = t.frames - frames0;
    return df > 0 ? static_cast<double>(dv) / static_cast<double>(df) : 0.0;
}

}  // namespace

NoisyTvReport run_noisytv_contrast(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    resolve_config(cfg);
    validate_config(cfg);
    if (cfg.env.noisy_room < 0)
        throw std::invalid_argument("noisytv: corridor config has no noisy room (set env.noisy_room)");
    const auto& nt = cfg.noisytv;
    if (nt.seeds.empty()) throw std::invalid_argument("noisytv: needs at least one seed");
    if (nt.batch_size < 2 || nt.train_steps < 1 || nt.replay_pool_steps < 8)
        throw std::invalid_argument("noisytv: degenerate replay settings");

    NoisyTvReport report;
    for (uint64_t seed : nt.seeds) {
        SeedContrast sc = contrast_for_seed(cfg, seed);
        report.rnd.push_back(sc.rnd);
        report.dynamics.push_back(sc.dynamics);
    }
    if (nt.run_agents) {
        for (uint64_t seed : nt.agent_seeds) {
            OccupancyResult occ;
            occ.seed = seed;
            occ.rnd_occupancy = agent_occupancy(cfg, "rnd", seed);
            occ.dynamics_occupancy = agent_occupancy(cfg, "dynamics", seed);
            report.occupancy.push_back(occ);
        }
    }
    return report;
}

std::string noisytv_report_text(const NoisyTvReport& report) {
    char line[256];
    std::string out;
    auto section = [&](const char* name, const std::vector<TileContrast>& rows) {
        for (const auto& r : rows) {
            std::snprintf(line, sizeof line,
                          "%s seed=%llu noisy=%.6g det=%.6g ratio=%.4g\n", name,
                          static_cast<unsigned long long>(r.seed), r.noisy_bonus, r.det_bonus,
                          r.ratio());
            out += line;
        }
        std::snprintf(line, sizeof line, "%s median ratio=%.4g\n", name, median_ratio(rows));
        out += line;
    };
    section("rnd", report.rnd);
    section("dynamics", report.dynamics);
    for (const auto& o : report.occupancy) {
        std::snprintf(line, sizeof line,
                      "occupancy seed=%llu rnd=%.4f dynamics=%.4f\n",
                      static_cast<unsigned long long>(o.seed), o.rnd_occupancy,
                      o.dynamics_occupancy);
        out += line;
    }
    return out;
}

std::string noisytv_report_csv(const NoisyTvReport& report) {
    char line[256];
    std::string out = "record,model,seed,noisy_bonus,det_bonus,ratio,noisy_occupancy\n";
    auto rows = [&](const char* model, const std::vector<TileContrast>& v) {
        for (const auto& r : v) {
            std::snprintf(line, sizeof line, "contrast,%s,%llu,%.10g,%.10g,%.10g,\n", model,
                          static_cast<unsigned long long>(r.seed), r.noisy_bonus, r.det_bonus,
                          r.ratio());
            out += line;
        }
    };
    rows("rnd", report.rnd);
    rows("dynamics", report.dynamics);
    for (const auto& o : report.occupancy) {
        std::snprintf(line, sizeof line, "occupancy,rnd,%llu,,,,%.10g\n",
                      static_cast<unsigned long long>(o.seed), o.rnd_occupancy);
        out += line;
        std::snprintf(line, sizeof line, "occupancy,dynamics,%llu,,,,%.10g\n",
                      static_cast<unsigned long long>(o.seed), o.dynamics_occupancy);
        out += line;
    }
    return out;
}

}  // namespace rndkit
