#include "triage/pipeline/queues.hpp"

namespace triage::pipeline {

AdmitOutcome admit_frame(std::deque<std::int64_t>& queue, std::size_t capacity,
                         DropPolicy policy, std::int64_t frame_index) {
  AdmitOutcome out;
  if (queue.size() < capacity) {
    queue.push_back(frame_index);
    out.admitted = true;
    return out;
  }
  if (policy == DropPolicy::Block) {
    out.would_block = true;
    return out;
  }
  out.dropped = queue.front();
  queue.pop_front();
  queue.push_back(frame_index);
  out.admitted = true;
  return out;
}

}  // namespace triage::pipeline
