#include <catch2/catch_amalgamated.hpp>

#include "attend/sequencing.hpp"

using namespace attend;

namespace {

SampleSeq stream_of(std::string user, int n) {
  SampleSeq seq;
  seq.user_id = std::move(user);
  seq.width = 2;
  for (int i = 0; i < n; ++i) {
    EncodedSample s;
    s.t = i * 60;
    s.x = {{0u, static_cast<double>(i + 1)}};
    seq.push(s);
  }
  seq.recompute_dt();
  return seq;
}

}  // namespace

TEST_CASE("batch size rule picks the smallest best divisor in range") {
  CHECK(choose_batch_size(90) == 15);
  CHECK(choose_batch_size(100) == 20);
  CHECK(choose_batch_size(254) == 23);
  CHECK(choose_batch_size(45) == 15);   // 45 mod 15 == 0 already
  CHECK(choose_batch_size(44, 15, 45) == 22);
  CHECK(choose_batch_size(1) == 15);    // every size ties, take the smallest
  CHECK(choose_batch_size(7, 2, 3) == 2);
  CHECK_THROWS_AS(choose_batch_size(0), ConfigError);
  CHECK_THROWS_AS(choose_batch_size(10, 0, 5), ConfigError);
  CHECK_THROWS_AS(choose_batch_size(10, 5, 4), ConfigError);
}

TEST_CASE("buckets chunk length-sorted streams and pad the tail") {
  std::vector<SampleSeq> owned;
  for (auto [id, n] : std::vector<std::pair<const char*, int>>{
           {"a", 120}, {"b", 3}, {"c", 7}, {"d", 55}, {"e", 49}, {"f", 50}, {"g", 101}})
    owned.push_back(stream_of(id, n));
  std::vector<const SampleSeq*> streams;
  for (auto& s : owned) streams.push_back(&s);

  SequencingConfig cfg;
  cfg.seq_len = 50;
  cfg.batch_lo = 2;
  cfg.batch_hi = 3;
  auto plan = build_buckets(streams, cfg);
  CHECK(plan.batch_size == 2);
  REQUIRE(plan.buckets.size() == 4);

  // sorted by length: b(3), c(7), e(49), f(50), d(55), g(101), a(120)
  CHECK(plan.buckets[0].slots[0]->user_id == "b");
  CHECK(plan.buckets[0].slots[1]->user_id == "c");
  CHECK(plan.buckets[0].padded_len == 50);
  CHECK(plan.buckets[0].num_batches == 1);

  CHECK(plan.buckets[1].padded_len == 50);
  CHECK(plan.buckets[2].padded_len == 150);  // 101 rounds up to 150
  CHECK(plan.buckets[2].num_batches == 3);

  CHECK(plan.buckets[3].slots[0]->user_id == "a");
  CHECK(plan.buckets[3].slots[1] == nullptr);  // dummy slot
  CHECK(plan.buckets[3].lens[1] == 0);
  CHECK(plan.buckets[3].padded_len == 150);

  SECTION("sample_at distinguishes data from padding") {
    auto& bkt = plan.buckets[0];
    auto r = sample_at(bkt, 0, 2);
    REQUIRE(r.has_value());
    CHECK(r->vals[0] == 3.0);
    CHECK(!sample_at(bkt, 0, 3).has_value());   // past stream b's 3 samples
    CHECK(sample_at(bkt, 1, 3).has_value());    // stream c still has data
    CHECK(!sample_at(plan.buckets[3], 1, 0).has_value());  // dummy slot
  }

  SECTION("training order carries state within buckets only") {
    auto order = training_order(plan);
    REQUIRE(order.size() == 1 + 1 + 3 + 3);
    CHECK(order[0].bucket == 0);
    CHECK(!order[0].carry_state);
    CHECK(order[2].bucket == 2);
    CHECK(!order[2].carry_state);
    CHECK(order[3].bucket == 2);
    CHECK(order[3].batch == 1);
    CHECK(order[3].carry_state);
    CHECK(order[4].carry_state);
    CHECK(!order[5].carry_state);  // new bucket resets state
  }
}

TEST_CASE("ties in stream length break by user id") {
  auto a = stream_of("z", 5);
  auto b = stream_of("y", 5);
  SequencingConfig cfg;
  cfg.seq_len = 5;
  cfg.batch_lo = 1;
  cfg.batch_hi = 1;
  auto plan = build_buckets({&a, &b}, cfg);
  CHECK(plan.buckets[0].slots[0]->user_id == "y");
  CHECK(plan.buckets[1].slots[0]->user_id == "z");
}

TEST_CASE("sequencing rejects unusable streams") {
  auto good = stream_of("a", 3);
  SampleSeq empty;
  empty.user_id = "e";
  empty.width = 2;
  CHECK_THROWS_AS(build_buckets({&good, &empty}, {}), ConfigError);
  CHECK_THROWS_AS(build_buckets({&good, nullptr}, {}), ConfigError);
  CHECK_THROWS_AS(build_buckets({}, {}), ConfigError);
  SequencingConfig bad;
  bad.seq_len = 0;
  CHECK_THROWS_AS(build_buckets({&good}, bad), ConfigError);
}
