#include "pfuse/data/stream.hpp"

#include "pfuse/common/error.hpp"

namespace pfuse::data {

StreamCursor::StreamCursor(const std::vector<ImpressionLog>& logs, std::size_t max_passes)
    : logs_(&logs), max_passes_(max_passes) {}

std::span<const ImpressionLog> StreamCursor::next_batch(std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (logs_->size() < batch_size) return {};
  if (position_ + batch_size > logs_->size()) {
    if (pass_ >= max_passes_) return {};
    ++pass_;
    position_ = 0;
  }
  if (pass_ > max_passes_) return {};
  std::span<const ImpressionLog> batch(logs_->data() + position_, batch_size);
  position_ += batch_size;
  ++served_;
  return batch;
}

}  // namespace pfuse::data
