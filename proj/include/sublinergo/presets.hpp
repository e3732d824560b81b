// Named models used by the CLI and the acceptance runner.
#pragma once

#include <string>
#include <vector>

#include "ergodic.hpp"
#include "gsde.hpp"
#include "models.hpp"

namespace sublinergo::presets {

enum class Kind { sequential, gsde, symbolic, rotation };

struct PresetInfo {
  std::string id;
  Kind kind;
  std::string summary;
};

inline const std::vector<PresetInfo>& catalog() {
  static const std::vector<PresetInfo> c{
      {"remark-smaller", Kind::sequential,
       "X_k = -xi_k (xi_{k+1} + 2), xi maximal on [-1, 1]; Gamma_2 strictly inside Gamma_1"},
      {"one-dependent", Kind::sequential, "X_n = xi_n + xi_{n+1}, xi a fair +-1 or +-2 coin; 1-dependent, zero mean"},
      {"exA-block", Kind::symbolic, "block point 0,1 then 2^{n-1} zeros and 2^{n-1} ones on [2^n, 2^{n+1})"},
      {"rotation-golden", Kind::rotation, "circle rotation by (sqrt 5 - 1) / 2; uniquely ergodic"},
      {"gou", Kind::gsde, "dX = -X dt + dB, Q = [1, 4]; G-Ornstein-Uhlenbeck, dissipative with alpha = 1"},
      {"cubic", Kind::gsde, "dX = -(X + X^3) dt + dB, Q = [1, 4]; dissipative with alpha = 1"},
  };
  return c;
}

inline const PresetInfo& info(const std::string& id) {
  for (const auto& p : catalog())
    if (p.id == id) return p;
  throw DomainError("unknown preset '" + id + "'");
}

inline SequentialModel sequential(const std::string& id, std::size_t horizon) {
  if (id == "remark-smaller") return models::remark_smaller(horizon, 0);
  if (id == "one-dependent") return models::one_dependent(horizon);
  throw DomainError("preset '" + id + "' is not a sequential model");
}

inline GSDEModel gsde(const std::string& id) {
  if (id == "gou") return gsde_presets::gou();
  if (id == "cubic") return gsde_presets::cubic();
  throw DomainError("preset '" + id + "' is not a G-SDE");
}

inline SymbolicPoint symbolic(const std::string& id, std::size_t window = kDefaultWindow) {
  if (id == "exA-block") return SymbolicPoint::block(window);
  throw DomainError("preset '" + id + "' is not a symbolic point");
}

inline RotationSystem rotation(const std::string& id) {
  if (id == "rotation-golden") return RotationSystem(RotationSystem::golden());
  throw DomainError("preset '" + id + "' is not a rotation");
}

}  // namespace sublinergo::presets
