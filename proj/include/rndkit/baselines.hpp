#pragma once

#include <map>
#include <vector>

#include "rndkit/bonus.hpp"
#include "rndkit/rnd.hpp"

namespace rndkit {

/// Forward-dynamics-on-random-features bonus. A frozen random feature net f
/// embeds observations; the predictor maps (normalized obs, one-hot action)
/// to f(next_obs). Unlike the embedding-matching bonus, stochastic
/// transitions leave this predictor with irreducible error.
class DynamicsBonus : public BonusModel {
  public:
    DynamicsBonus(const RndConfig& cfg, int num_actions, uint64_t seed);

    RndConfig cfg;
    int num_actions;
    DenseNet features;  // frozen
    DenseNet predictor;
    AdamState predictor_opt;
    Rng dropout_rng;

    Vec bonus(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
              const std::vector<int>& next_state) override;
    double train_step(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
                      const std::vector<int>& next_state) override;
    std::string kind() const override { return "dynamics"; }
    int64_t opt_steps() const override { return predictor_opt.t; }

    void save(BinWriter& w) const override;
    void load(BinReader& r) override;
};

/// Squared error between predicted and actual next-observation features,
/// averaged over the k feature dims. Read-only.
Vec dynamics_bonus(DynamicsBonus& db, const Mat& obs, const std::vector<int>& actions,
                   const Mat& next_obs);

/// One optimizer step on the dynamics predictor over a transition batch
/// thinned by per-element Bernoulli(keep_prob). Returns the pre-step loss.
double train_dynamics(DynamicsBonus& db, const Mat& obs, const std::vector<int>& actions,
                      const Mat& next_obs);

/// Reconstruction-error bonus: an encoder-decoder net squeezed through a
/// bottleneck of max(2, obs_dim/2) units, trained to reproduce normalized
/// observations. Bonus = mean squared reconstruction error per row.
class AutoencoderBonus : public BonusModel {
  public:
    AutoencoderBonus(const RndConfig& cfg, uint64_t seed);

    RndConfig cfg;
    int bottleneck;
    DenseNet net;
    AdamState opt;
    Rng dropout_rng;

    Vec bonus(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
              const std::vector<int>& next_state) override;
    double train_step(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
                      const std::vector<int>& next_state) override;
    std::string kind() const override { return "autoencoder"; }
    int64_t opt_steps() const override { return opt.t; }

    void save(BinWriter& w) const override;
    void load(BinReader& r) override;
};

Vec autoencoder_bonus(AutoencoderBonus& ae, const Mat& obs);
double train_autoencoder(AutoencoderBonus& ae, const Mat& obs);

enum class CountForm : uint8_t { InverseN, InverseSqrtN };

/// Tabular visit counts keyed by state index. An ordered map keeps
/// serialization byte-stable across runs.
struct CountTable {
    CountForm form = CountForm::InverseSqrtN;
    std::map<int, int64_t> counts;
};

void record_visit(CountTable& table, int state_index);

/// 1/n or 1/sqrt(n) of the recorded visit count. A never-visited state is
/// scored as if this were its first visit (bonus 1) without incrementing.
double count_bonus(const CountTable& table, int state_index);

void write_count_table(BinWriter& w, const CountTable& t);
CountTable read_count_table(BinReader& r);

/// Exact-oracle exploration signal for tabular envs: each step records a
/// visit to the reached state and pays the count bonus.
class CountBonus : public BonusModel {
  public:
    CountBonus(int obs_dim, int num_envs, double gamma_i, bool centered_std,
               CountForm form = CountForm::InverseSqrtN)
        : BonusModel(obs_dim, num_envs, gamma_i, centered_std) {
        table.form = form;
    }

    CountTable table;

    Vec bonus(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
              const std::vector<int>& next_state) override;
    double train_step(const Mat&, const std::vector<int>&, const Mat&,
                      const std::vector<int>&) override {
        return 0.0;
    }
    std::string kind() const override { return "count"; }

    void save(BinWriter& w) const override;
    void load(BinReader& r) override;
};

}  // namespace rndkit
