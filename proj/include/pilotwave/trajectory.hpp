#pragma once

#include <limits>
#include <string>
#include <vector>

namespace pilotwave {

enum class EventKind { Start, Jump, Creation, Annihilation, Sample, Flagged, End };

const char* event_name(EventKind kind);

/// One entry of a trajectory path. For lattice runs the ids are basis
/// indices; for continuum runs they are sector numbers and `positions`
/// holds the configuration after the event.
struct TrajectoryEvent {
  double t = 0.0;
  EventKind kind = EventKind::Start;
  long source_id = -1;
  long destination_id = -1;
  double destination_position = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> positions;
};

/// Configuration of a trajectory at a requested checkpoint time.
struct CheckpointConfig {
  double t = 0.0;
  long config_id = -1;  // lattice basis index or sector
  std::vector<double> positions;
};

struct TrajectoryRecord {
  std::vector<TrajectoryEvent> events;
  std::vector<CheckpointConfig> checkpoints;
  bool flagged = false;
  std::string flag_reason;

  std::size_t jump_count() const;
};

/// CSV with header trajectory,t,event_type,config_id,destination_id,
/// destination_position,positions (positions joined by ';').
std::string trajectories_csv(const std::vector<TrajectoryRecord>& records);

}  // namespace pilotwave
