#include "doctest.h"
#include "realism/demand.hpp"
#include "realism/rng.hpp"

#include <sstream>

using namespace realism;

TEST_SUITE_BEGIN("demand");

namespace {

const char* kHeader =
    "trip_id,start_time,end_time,trip_distance_m,trip_duration_s,"
    "start_lon,start_lat,end_lon,end_lat,operator\n";

}  // namespace

TEST_CASE("timestamp parsing round trips") {
  const auto t = parse_timestamp("5/28/2022 14:00");
  REQUIRE(t.has_value());
  CHECK(format_timestamp(*t) == "5/28/2022 14:00");
  CHECK(*parse_timestamp("12/1/1999 03:05") ==
        days_from_civil(1999, 12, 1) * 1440 + 3 * 60 + 5);
  CHECK_FALSE(parse_timestamp("2022-05-28 14:00").has_value());
  CHECK_FALSE(parse_timestamp("13/40/2022 14:00").has_value());
  CHECK_FALSE(parse_timestamp("garbage").has_value());
}

TEST_CASE("dataset sample row parses") {
  std::istringstream in(
      std::string(kHeader) +
      "T001,5/28/2022 14:00,5/28/2022 15:00,2484,1544,-87.62519,41.87887,"
      "-87.62520,41.87886,Lime\n");
  const TripParseResult r = parse_trips(in);
  REQUIRE(r.trips.size() == 1);
  CHECK(r.skipped == 0);
  const TripRecord& t = r.trips[0];
  CHECK(t.trip_id == "T001");
  CHECK(t.duration_s == doctest::Approx(1544.0));
  CHECK(t.distance_m == doctest::Approx(2484.0));
  CHECK(t.operator_label == "Lime");
  CHECK(t.end_minute - t.start_minute == 60);
  CHECK(t.start_lon == doctest::Approx(-87.62519));
}

TEST_CASE("header is order and case insensitive") {
  std::istringstream in(
      "Operator,Start_Time,End_Time,Trip_Duration_s,Trip_Distance_m,"
      "Start_Lon,Start_Lat,End_Lon,End_Lat,Trip_ID\n"
      "Spin,6/1/2022 08:30,6/1/2022 08:45,900,901,-87.6,41.9,-87.61,41.91,T77\n");
  const TripParseResult r = parse_trips(in);
  REQUIRE(r.trips.size() == 1);
  CHECK(r.trips[0].operator_label == "Spin");
  CHECK(r.trips[0].trip_id == "T77");
}

TEST_CASE("empty file with header yields empty list") {
  std::istringstream in(kHeader);
  const TripParseResult r = parse_trips(in);
  CHECK(r.trips.empty());
  CHECK(r.skipped == 0);
}

TEST_CASE("malformed rows are skipped and counted") {
  std::istringstream in(
      std::string(kHeader) +
      "T1,5/28/2022 14:00,5/28/2022 15:00,100,abc,-87.6,41.9,-87.6,41.9,Lime\n"
      "T2,5/28/2022 14:00,5/28/2022 15:00,100,600,-87.6,41.9,-87.6,41.9,Lime\n");
  const TripParseResult r = parse_trips(in);
  CHECK(r.trips.size() == 1);
  CHECK(r.skipped == 1);
}

TEST_CASE("missing column is a hard error") {
  std::istringstream in("trip_id,start_time,end_time,trip_distance_m,trip_duration_s\n");
  CHECK_THROWS_AS(parse_trips(in), std::runtime_error);
}

TEST_CASE("serialize then parse is the identity") {
  std::vector<TripRecord> trips;
  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    TripRecord t;
    t.trip_id = "T" + std::to_string(k);
    t.start_minute = 19000 * 1440 + static_cast<long long>(rng.below(10000));
    t.end_minute = t.start_minute + static_cast<long long>(rng.below(120));
    t.distance_m = std::floor(rng.uniform(0.0, 5000.0));
    t.duration_s = std::floor(rng.uniform(1.0, 3600.0));
    t.start_lon = -87.0 - rng.uniform();
    t.start_lat = 41.0 + rng.uniform();
    t.end_lon = -87.0 - rng.uniform();
    t.end_lat = 41.0 + rng.uniform();
    t.operator_label = (k % 2) ? "Lime" : "Spin";
    trips.push_back(t);
  }
  std::ostringstream out;
  serialize_trips(out, trips);
  std::istringstream in(out.str());
  const TripParseResult r = parse_trips(in);
  CHECK(r.skipped == 0);
  REQUIRE(r.trips.size() == trips.size());
  for (size_t k = 0; k < trips.size(); ++k) CHECK(r.trips[k] == trips[k]);
}

TEST_CASE("region assignment picks the nearest centroid") {
  RegionMap map = RegionMap::grid(6, 3, 2.0);
  for (int k = 0; k < 6; ++k) CHECK(assign_region(map.lon[k], map.lat[k], map) == k);

  // equidistant between 1 and 4: tie goes to the lower id
  const double mid_lon = 0.5 * (map.lon[1] + map.lon[4]);
  const double mid_lat = 0.5 * (map.lat[1] + map.lat[4]);
  CHECK(assign_region(mid_lon, mid_lat, map) == 1);

  RegionMap single = RegionMap::grid(1, 1, 1.0);
  CHECK(assign_region(12.0, -5.0, single) == 0);
}

TEST_CASE("region map CSV round trip and validation") {
  RegionMap map = RegionMap::grid(4, 2, 1.5);
  std::ostringstream out;
  map.to_csv(out);
  std::istringstream in(out.str());
  const RegionMap back = RegionMap::from_csv(in);
  REQUIRE(back.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(back.lon[k] == doctest::Approx(map.lon[k]));
    CHECK(back.lat[k] == doctest::Approx(map.lat[k]));
  }
  std::istringstream bad("region_id,lon,lat\n0,1,2\n0,3,4\n");
  CHECK_THROWS_AS(RegionMap::from_csv(bad), std::runtime_error);
}

TEST_CASE("build_demand buckets trips into slots") {
  RegionMap map = RegionMap::grid(6, 3, 2.0);
  std::vector<TripRecord> trips;
  TripRecord t;
  t.trip_id = "T1";
  t.start_minute = days_from_civil(2022, 6, 1) * 1440 + 14 * 60;
  t.end_minute = t.start_minute + 20;
  t.duration_s = 1200;
  t.distance_m = 1000;
  t.start_lon = map.lon[2];
  t.start_lat = map.lat[2];
  t.end_lon = map.lon[5];
  t.end_lat = map.lat[5];
  t.operator_label = "Lime";
  trips.push_back(t);

  BuildStats stats;
  DemandDataset ds = build_demand(trips, map, 24, &stats);
  CHECK(stats.used == 1);
  CHECK(ds.num_days == 1);
  CHECK(ds.tensor(14).at(0, 2, 5) == 1);
  CHECK(ds.total_demand() == 1);
  CHECK(ds.duration_s(0, 2, 5) == doctest::Approx(1200.0));

  // a second identical trip doubles the cell and keeps the mean duration
  TripRecord t2 = t;
  t2.trip_id = "T2";
  t2.duration_s = 600;
  trips.push_back(t2);
  ds = build_demand(trips, map, 24, &stats);
  CHECK(ds.tensor(14).at(0, 2, 5) == 2);
  CHECK(ds.duration_s(0, 2, 5) == doctest::Approx(900.0));
}

TEST_CASE("build_demand conserves trips against the configured window") {
  RegionMap map = RegionMap::grid(4, 2, 2.0);
  Rng rng(11);
  std::vector<TripRecord> trips;
  const long long day0 = days_from_civil(2022, 7, 1);
  for (int k = 0; k < 300; ++k) {
    TripRecord t;
    t.trip_id = "T" + std::to_string(k);
    // about one in six lands outside the 5-day window
    const long long day = day0 + static_cast<long long>(rng.below(6));
    t.start_minute = day * 1440 + static_cast<long long>(rng.below(1440));
    t.end_minute = t.start_minute + 10;
    t.duration_s = 300 + std::floor(rng.uniform(0.0, 600.0));
    t.distance_m = 500;
    t.start_lon = map.lon[rng.below(4)];
    t.start_lat = map.lat[rng.below(4)];
    t.end_lon = map.lon[rng.below(4)];
    t.end_lat = map.lat[rng.below(4)];
    t.operator_label = (k % 3) ? "Lime" : "Bird";
    trips.push_back(t);
  }
  BuildStats stats;
  const DemandDataset ds = build_demand(trips, map, 24, &stats, day0, 5);
  CHECK(stats.used + stats.skipped == static_cast<long long>(trips.size()));
  CHECK(ds.total_demand() == stats.used);
}

TEST_CASE("predictor is the slot-of-day mean") {
  RegionMap map = RegionMap::grid(2, 2, 2.0);
  std::vector<TripRecord> trips;
  const long long day0 = days_from_civil(2022, 8, 1);
  auto add = [&](int day, int count) {
    for (int k = 0; k < count; ++k) {
      TripRecord t;
      t.trip_id = "T";
      t.start_minute = (day0 + day) * 1440 + 9 * 60;
      t.end_minute = t.start_minute + 10;
      t.duration_s = 600;
      t.distance_m = 500;
      t.start_lon = map.lon[0];
      t.start_lat = map.lat[0];
      t.end_lon = map.lon[1];
      t.end_lat = map.lat[1];
      t.operator_label = "Lime";
      trips.push_back(t);
    }
  };
  add(0, 4);
  add(1, 6);
  const DemandDataset ds = build_demand(trips, map, 24, nullptr, day0, 2);
  const DemandPredictor pred(ds);

  // history 4 and 6 at slot-of-day 9 averages to 5
  const auto p = pred.predict(0, 9, 2);
  CHECK(p[0][0 * 2 + 1] == doctest::Approx(5.0));
  // slot 10 has no history anywhere
  for (double v : p[1]) CHECK(v == doctest::Approx(0.0));
  CHECK(pred.city_total(0, 9) == doctest::Approx(5.0));

  // brute-force re-scan oracle over every (op, slot-of-day, od) cell
  for (int sod = 0; sod < 24; ++sod) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (int d = 0; d < ds.num_days; ++d)
          mean += ds.tensor(d * 24 + sod).at(0, i, j);
        mean /= ds.num_days;
        CHECK(pred.predict(0, sod, 1)[0][static_cast<size_t>(i) * 2 + j] ==
              doctest::Approx(mean));
      }
    }
  }
}

TEST_CASE("synthetic generation is deterministic") {
  SynthConfig cfg;
  cfg.operators = {"a", "b"};
  cfg.num_regions = 3;
  cfg.days = 2;
  cfg.slots_per_day = 24;
  cfg.seed = 99;
  cfg.rates.assign(2 * 3 * 3, 0.7);
  cfg.profile.assign(24, 1.0);
  cfg.duration_s.assign(3 * 3, 600.0);

  const DemandDataset a = synth_demand(cfg);
  const DemandDataset b = synth_demand(cfg);
  REQUIRE(a.num_slots() == b.num_slots());
  for (int s = 0; s < a.num_slots(); ++s) CHECK(a.tensor(s) == b.tensor(s));

  cfg.seed = 100;
  const DemandDataset c = synth_demand(cfg);
  bool any_diff = false;
  for (int s = 0; s < a.num_slots(); ++s)
    if (!(a.tensor(s) == c.tensor(s))) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("synthetic zero rates yield an empty dataset") {
  SynthConfig cfg;
  cfg.operators = {"a"};
  cfg.num_regions = 2;
  cfg.days = 1;
  cfg.slots_per_day = 24;
  cfg.seed = 1;
  cfg.rates.assign(1 * 2 * 2, 0.0);
  cfg.profile.assign(24, 1.0);
  cfg.duration_s.assign(2 * 2, 300.0);
  CHECK(synth_demand(cfg).total_demand() == 0);
}

TEST_CASE("synthetic sample mean approaches the rate") {
  SynthConfig cfg;
  cfg.operators = {"a"};
  cfg.num_regions = 1;
  cfg.days = 10000;  // 10000 independent draws of the single daily slot
  cfg.slots_per_day = 1;
  cfg.seed = 5;
  cfg.rates.assign(1, 4.0);
  cfg.profile.assign(1, 1.0);
  cfg.duration_s.assign(1, 600.0);
  const DemandDataset ds = synth_demand(cfg);
  const double mean = static_cast<double>(ds.total_demand()) / cfg.days;
  CHECK(mean == doctest::Approx(4.0).epsilon(0.025));
}

TEST_CASE("dataset to trips round trips through ingestion") {
  SynthConfig cfg;
  cfg.operators = {"a", "b"};
  cfg.num_regions = 4;
  cfg.days = 2;
  cfg.slots_per_day = 24;
  cfg.seed = 17;
  cfg.rates.assign(2 * 4 * 4, 0.2);
  cfg.profile.assign(24, 1.0);
  cfg.duration_s.assign(4 * 4, 480.0);
  const DemandDataset ds = synth_demand(cfg);
  const RegionMap map = RegionMap::grid(4, 2, 2.0);

  const std::vector<TripRecord> trips = dataset_to_trips(ds, map);
  REQUIRE(static_cast<long long>(trips.size()) == ds.total_demand());
  if (trips.empty()) return;
  const DemandDataset back =
      build_demand(trips, map, 24, nullptr, ds.first_day, ds.num_days);
  for (int s = 0; s < ds.num_slots(); ++s)
    for (int m = 0; m < 2; ++m)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          CHECK(back.tensor(s).at(m, i, j) == ds.tensor(s).at(m, i, j));
}

TEST_SUITE_END();
