#include "pmtnet/event.hpp"

#include "pmtnet/errors.hpp"

namespace pmtnet {

std::string_view label_name(EventLabel label) {
  switch (label) {
    case EventLabel::Muon: return "Muon";
    case EventLabel::Flasher: return "Flasher";
    case EventLabel::IBDPrompt: return "IBD prompt";
    case EventLabel::IBDDelay: return "IBD delay";
    case EventLabel::Other: return "Other";
  }
  return "?";
}

std::string_view label_key(EventLabel label) {
  switch (label) {
    case EventLabel::Muon: return "muon";
    case EventLabel::Flasher: return "flasher";
    case EventLabel::IBDPrompt: return "ibd_prompt";
    case EventLabel::IBDDelay: return "ibd_delay";
    case EventLabel::Other: return "other";
  }
  return "?";
}

EventLabel label_from_index(std::size_t index) {
  if (index >= kNumClasses) throw LabelError("label index " + std::to_string(index) + " out of range");
  return static_cast<EventLabel>(index);
}

}  // namespace pmtnet
