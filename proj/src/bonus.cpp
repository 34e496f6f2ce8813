#include "rndkit/bonus.hpp"

#include "rndkit/serialize.hpp"

namespace rndkit {

void BonusModel::save(BinWriter& w) const {
    write_rms(w, obs_rms);
    write_retnorm(w, ret_norm);
}

void BonusModel::load(BinReader& r) {
    obs_rms = read_rms(r);
    ret_norm = read_retnorm(r);
}

}  // namespace rndkit
