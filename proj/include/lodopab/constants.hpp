#pragma once

#include <array>
#include <string_view>

#include "json.hpp"

namespace lodopab {

/// Physical constants of the measurement model.
///
/// mu_water / mu_air are the linear attenuation coefficients of water and
/// air at roughly 60 keV; mu_max is the attenuation of the largest HU
/// value representable in 12-bit encoding (3071 HU) and is derived, never
/// stored, so the defining relation holds exactly.
struct PhysicsConstants {
  double mu_water = 20.0;  // 1/m
  double mu_air = 0.02;    // 1/m
  double n0 = 4096.0;      // photons per detector pixel before attenuation
  double min_photon_count = 0.1;
  double sigma_detector = 0.0;  // std-dev of additive Gaussian detector noise

  double mu_max() const {
    return 3071.0 * (mu_water - mu_air) / 1000.0 + mu_water;
  }
};

void validate(const PhysicsConstants& constants);

nlohmann::json to_json(const PhysicsConstants& constants);
PhysicsConstants constants_from_json(const nlohmann::json& j);

/// Patients excluded from the dataset because their reconstruction circle
/// is deformed and does not contain the central 362 px crop.
inline constexpr std::array<std::string_view, 13> kExcludedPatientIds = {
    "0004", "0032", "0102", "0116", "0120", "0289", "0368",
    "0418", "0541", "0798", "0926", "0972", "1000"};

}  // namespace lodopab
