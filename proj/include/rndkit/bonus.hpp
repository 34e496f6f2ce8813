#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rndkit/matrix.hpp"
#include "rndkit/stats.hpp"

namespace rndkit {

class BinWriter;
class BinReader;

/// Common shell for every exploration bonus: shared observation whitening
/// stats and the intrinsic-return normalizer. bonus() is called once per
/// collected step with the full transition and may update visit bookkeeping;
/// train_step() runs one optimizer step on a minibatch of transitions and
/// returns the pre-step loss (0 when the model has nothing to train).
class BonusModel {
  public:
    BonusModel(int obs_dim, int num_envs, double gamma_i, bool centered_std)
        : obs_rms(obs_dim), ret_norm(num_envs, gamma_i, centered_std) {}
    virtual ~BonusModel() = default;

    RunningMeanStd obs_rms;
    ReturnNormalizer ret_norm;

    virtual Vec bonus(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
                      const std::vector<int>& next_state) = 0;
    virtual double train_step(const Mat& obs, const std::vector<int>& actions,
                              const Mat& next_obs, const std::vector<int>& next_state) = 0;
    virtual std::string kind() const = 0;
    virtual int64_t opt_steps() const { return 0; }  // optimizer steps taken so far

    virtual void save(BinWriter& w) const;
    virtual void load(BinReader& r);
};

/// Control arm: bonus identically zero, nothing to train.
class ZeroBonus : public BonusModel {
  public:
    ZeroBonus(int obs_dim, int num_envs, double gamma_i, bool centered_std)
        : BonusModel(obs_dim, num_envs, gamma_i, centered_std) {}

    Vec bonus(const Mat&, const std::vector<int>&, const Mat& next_obs,
              const std::vector<int>&) override {
        return Vec(next_obs.rows, 0.0);
    }
    double train_step(const Mat&, const std::vector<int>&, const Mat&,
                      const std::vector<int>&) override {
        return 0.0;
    }
    std::string kind() const override { return "none"; }
};

}  // namespace rndkit
