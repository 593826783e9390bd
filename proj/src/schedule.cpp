#include "gtsd/schedule.hpp"

namespace gtsd {

std::string schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::linear:
      return "linear";
    case ScheduleKind::cosine:
      return "cosine";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_u16(uint16_t v) {
  require(v <= 1, Errc::bad_format, "unknown schedule family id " + std::to_string(v));
  return static_cast<ScheduleKind>(v);
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
  if (name == "linear") return ScheduleKind::linear;
  if (name == "cosine") return ScheduleKind::cosine;
  fail(Errc::bad_format, "unknown schedule family: " + name);
}

}  // namespace gtsd
