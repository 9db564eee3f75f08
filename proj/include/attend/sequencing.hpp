#pragma once

#include "attend/encode.hpp"

namespace attend {

struct SequencingConfig {
  int seq_len = 50;
  int batch_lo = 15;
  int batch_hi = 45;
};

// Smallest batch size in [lo, hi] that minimizes num_streams mod b, so that
// the final, dummy-padded bucket stays as small as possible.
inline int choose_batch_size(int num_streams, int lo = 15, int hi = 45) {
  if (num_streams <= 0) throw ConfigError("need at least one stream to batch");
  if (lo <= 0 || hi < lo) throw ConfigError("invalid batch size range");
  int best = lo, best_rem = num_streams % lo;
  for (int b = lo + 1; b <= hi; ++b) {
    int rem = num_streams % b;
    if (rem < best_rem) {
      best = b;
      best_rem = rem;
    }
  }
  return best;
}

// One bucket: batch_size parallel slots of equal padded length. Slots beyond
// the available streams are dummies (nullptr) and always produce padding.
struct Bucket {
  std::vector<const SampleSeq*> slots;
  std::vector<std::uint32_t> lens;  // real stream lengths per slot (0 for dummies)
  std::uint32_t padded_len = 0;
  int num_batches = 0;
};

struct BucketPlan {
  int batch_size = 0;
  int seq_len = 0;
  std::vector<Bucket> buckets;
};

// Sort streams by length (user id breaks ties), chunk into buckets of
// batch_size consecutive streams, zero-pad each bucket to a multiple of
// seq_len. Leftover streams form a final short bucket padded with dummies.
inline BucketPlan build_buckets(std::vector<const SampleSeq*> streams,
                                const SequencingConfig& cfg = {}) {
  if (cfg.seq_len <= 0) throw ConfigError("sequence length must be positive");
  for (const auto* s : streams) {
    if (!s) throw ConfigError("null stream handed to sequencing");
    if (s->empty()) throw ConfigError("empty stream handed to sequencing: user " + s->user_id);
  }
  if (streams.empty()) throw ConfigError("need at least one stream to batch");

  std::sort(streams.begin(), streams.end(), [](const SampleSeq* a, const SampleSeq* b) {
    if (a->size() != b->size()) return a->size() < b->size();
    return a->user_id < b->user_id;
  });

  BucketPlan plan;
  plan.batch_size = choose_batch_size(static_cast<int>(streams.size()), cfg.batch_lo, cfg.batch_hi);
  plan.seq_len = cfg.seq_len;
  auto b = static_cast<std::size_t>(plan.batch_size);
  for (std::size_t i = 0; i < streams.size(); i += b) {
    Bucket bucket;
    std::uint32_t max_len = 0;
    for (std::size_t j = i; j < i + b; ++j) {
      if (j < streams.size()) {
        bucket.slots.push_back(streams[j]);
        bucket.lens.push_back(static_cast<std::uint32_t>(streams[j]->size()));
        max_len = std::max(max_len, bucket.lens.back());
      } else {
        bucket.slots.push_back(nullptr);
        bucket.lens.push_back(0);
      }
    }
    auto L = static_cast<std::uint32_t>(cfg.seq_len);
    bucket.padded_len = (max_len + L - 1) / L * L;
    bucket.num_batches = static_cast<int>(bucket.padded_len / L);
    plan.buckets.push_back(std::move(bucket));
  }
  return plan;
}

// Real sample at (slot, global step), or nothing when the position is padding.
inline std::optional<SampleRef> sample_at(const Bucket& bucket, int slot, std::uint32_t global_step) {
  const auto* seq = bucket.slots[slot];
  if (!seq || global_step >= bucket.lens[slot]) return std::nullopt;
  return seq->ref(global_step);
}

struct StepRef {
  int bucket = 0;
  int batch = 0;
  bool carry_state = false;  // false at bucket starts: fresh recurrent state
};

// Fixed visiting order: buckets in construction order, batches consecutively.
// State carries across batches within a bucket and resets at bucket boundaries.
inline std::vector<StepRef> training_order(const BucketPlan& plan) {
  std::vector<StepRef> out;
  for (std::size_t bi = 0; bi < plan.buckets.size(); ++bi)
    for (int k = 0; k < plan.buckets[bi].num_batches; ++k)
      out.push_back({static_cast<int>(bi), k, k > 0});
  return out;
}

}  // namespace attend
