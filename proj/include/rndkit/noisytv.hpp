#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rndkit/config.hpp"

namespace rndkit {

// Converged per-tile bonus for one model on one seed.
struct TileContrast {
    uint64_t seed = 0;
    double noisy_bonus = 0.0;
    double det_bonus = 0.0;
    double ratio() const;
};

// Fraction of steps spent in the noisy room during the second half of training.
struct OccupancyResult {
    uint64_t seed = 0;
    double rnd_occupancy = 0.0;
    double dynamics_occupancy = 0.0;
};

struct NoisyTvReport {
    std::vector<TileContrast> rnd;
    std::vector<TileContrast> dynamics;
    std::vector<OccupancyResult> occupancy;  // empty unless cfg.noisytv.run_agents
};

double median_ratio(const std::vector<TileContrast>& rows);

// Trains the dynamics and distillation bonuses on identical streams of fresh
// in-tile transitions, where half of every batch is the same tile with its
// noise channels frozen to a per-seed constant frame (the matched
// deterministic tile), then measures the converged bonus of each model on
// held-out fresh vs frozen transitions. Optionally also trains full agents
// with each bonus and reports noisy-room occupancy.
NoisyTvReport run_noisytv_contrast(const ExperimentConfig& cfg);

std::string noisytv_report_text(const NoisyTvReport& report);
std::string noisytv_report_csv(const NoisyTvReport& report);

}  // namespace rndkit
