#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pfuse/data/datagen.hpp"

namespace pfuse::data {

/// Sequential reader over a training split, replayed up to `max_passes`
/// times. Batches never straddle a pass boundary; a short tail is skipped.
class StreamCursor {
 public:
  StreamCursor(const std::vector<ImpressionLog>& logs, std::size_t max_passes);

  /// Next batch, or an empty span once the stream is exhausted.
  std::span<const ImpressionLog> next_batch(std::size_t batch_size);

  std::size_t position() const noexcept { return position_; }
  std::size_t passes_started() const noexcept { return pass_; }
  std::size_t batches_served() const noexcept { return served_; }

 private:
  const std::vector<ImpressionLog>* logs_;
  std::size_t max_passes_;
  std::size_t position_ = 0;
  std::size_t pass_ = 1;
  std::size_t served_ = 0;
};

}  // namespace pfuse::data
