#include "pilotwave/trajectory.hpp"

#include <cmath>
#include <sstream>

#include "pilotwave/format.hpp"

namespace pilotwave {

const char* event_name(EventKind kind) {
  switch (kind) {
    case EventKind::Start: return "start";
    case EventKind::Jump: return "jump";
    case EventKind::Creation: return "creation";
    case EventKind::Annihilation: return "annihilation";
    case EventKind::Sample: return "sample";
    case EventKind::Flagged: return "flagged";
    case EventKind::End: return "end";
  }
  return "unknown";
}

std::size_t TrajectoryRecord::jump_count() const {
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e.kind == EventKind::Jump || e.kind == EventKind::Creation ||
        e.kind == EventKind::Annihilation) {
      ++n;
    }
  }
  return n;
}

std::string trajectories_csv(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream os;
  os << "trajectory,t,event_type,config_id,destination_id,destination_position,positions\n";
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (const auto& e : records[r].events) {
      os << r << ',' << format_double(e.t) << ',' << event_name(e.kind) << ',' << e.source_id
         << ',';
      if (e.destination_id >= 0) os << e.destination_id;
      os << ',';
      if (!std::isnan(e.destination_position)) os << format_double(e.destination_position);
      os << ',';
      for (std::size_t i = 0; i < e.positions.size(); ++i) {
        if (i) os << ';';
        os << format_double(e.positions[i]);
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace pilotwave
