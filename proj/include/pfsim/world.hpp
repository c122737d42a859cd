#pragma once

// Simulation environment: stationary source, mobile vehicle (UGV in 2D, UAV
// in 3D) and the imperfect binary sector sensor. The environment runs in
// double precision; only the filter datapath is mode-dependent.

#include <array>
#include <cmath>
#include <cstdint>

#include "pfsim/fixed.hpp"
#include "pfsim/lfsr.hpp"
#include "pfsim/subfilter.hpp"

namespace pfsim {

struct SourceState {
  std::array<double, 3> pos{};
};

struct VehicleState {
  std::array<double, 3> pos{};
  Angle12 heading{};
};

struct SensorConfig {
  double alpha = 0.8;  // detection probability
  double beta = 0.6;   // clutter probability
  int sectors = 8;     // 8 in 2D, 16 in 3D
};

// True bearing of the source from the vehicle; elevation is zero in 2D.
// Throws DegenerateBearing when the positions coincide (vehicle reached the
// source).
inline BearingAngles true_bearing(const SourceState& source,
                                  const VehicleState& vehicle, int dims) {
  const double dx = source.pos[0] - vehicle.pos[0];
  const double dy = source.pos[1] - vehicle.pos[1];
  if (dims == 2) {
    if (dx == 0.0 && dy == 0.0) throw DegenerateBearing{};
    return BearingAngles{angle_from_radians(std::atan2(dy, dx)), Angle12{0}};
  }
  const double dz = source.pos[2] - vehicle.pos[2];
  if (dx == 0.0 && dy == 0.0 && dz == 0.0) throw DegenerateBearing{};
  return BearingAngles{angle_from_radians(std::atan2(dy, dx)),
                       angle_from_radians(std::atan2(dz, std::hypot(dx, dy)))};
}

// Sector (1..sectors) containing the source, using the same sector geometry
// as the importance unit.
inline int source_sector(const SourceState& source, const VehicleState& vehicle,
                         int dims) {
  const BearingAngles b = true_bearing(source, vehicle, dims);
  if (dims == 2) return sector_index(b.azimuth, vehicle.heading);
  return sector_index3(b.azimuth, vehicle.heading, b.elevation);
}

// Binary measurement word: the source sector fires with probability alpha,
// every other sector with probability alpha * beta. One word per sector is
// drawn from the dedicated sensor substream, in sector order.
inline std::uint32_t sense(const SourceState& source, const VehicleState& vehicle,
                           const SensorConfig& cfg, int dims, Lfsr16& sensor_rng) {
  int j_star;
  try {
    j_star = source_sector(source, vehicle, dims);
  } catch (const DegenerateBearing&) {
    j_star = 0;  // on top of the source: no sector is preferred
  }
  std::uint32_t z = 0;
  for (int j = 1; j <= cfg.sectors; ++j) {
    const double p = (j == j_star) ? cfg.alpha : cfg.alpha * cfg.beta;
    if (uniform01(sensor_rng.next()) < p) z |= (1u << (j - 1));
  }
  return z;
}

// Angular center of a steering sector relative to the current heading.
inline Angle12 sector_center_offset(int azimuth_sector) {
  return Angle12{static_cast<std::uint16_t>(((azimuth_sector - 1) * 512 + 256) &
                                            (kAngleModulus - 1))};
}

// Instantaneous heading change to the sector center, then a fixed-length
// step. In 3D the steering sector also selects the elevation hemisphere and
// the vehicle climbs or dives at the hemisphere center (+-pi/4).
inline VehicleState advance_vehicle(const VehicleState& vehicle,
                                    int steering_sector, double step_len,
                                    int dims) {
  VehicleState next = vehicle;
  const int az_sector = (steering_sector - 1) % 8 + 1;
  next.heading = angle_add(vehicle.heading, sector_center_offset(az_sector));
  const double h = angle_to_radians(next.heading);
  if (dims == 2) {
    next.pos[0] += step_len * std::cos(h);
    next.pos[1] += step_len * std::sin(h);
    return next;
  }
  const double elev = (steering_sector <= 8 ? 1.0 : -1.0) *
                      (3.14159265358979323846 / 4.0);
  next.pos[0] += step_len * std::cos(h) * std::cos(elev);
  next.pos[1] += step_len * std::sin(h) * std::cos(elev);
  next.pos[2] += step_len * std::sin(elev);
  return next;
}

}  // namespace pfsim
