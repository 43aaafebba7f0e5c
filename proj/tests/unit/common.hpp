#pragma once

#include <sstream>
#include <string>

#include "gbpobs/network.hpp"

namespace test {

inline const std::string kData = GBPOBS_DATA_DIR;

inline gbpobs::PowerNetwork case6() { return gbpobs::parse_network_file(kData + "/case6.json"); }

inline gbpobs::MeasurementSet case6_meas(const gbpobs::PowerNetwork& net) {
  return gbpobs::parse_measurement_file(kData + "/case6_meas.json", net);
}

inline gbpobs::MeasurementSet meas(const std::string& json, const gbpobs::PowerNetwork& net) {
  std::istringstream in(json);
  return gbpobs::parse_measurement_set(in, net);
}

inline gbpobs::PowerNetwork net(const std::string& json) {
  std::istringstream in(json);
  return gbpobs::parse_network(in);
}

}  // namespace test
