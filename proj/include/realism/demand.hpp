#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "realism/types.hpp"

namespace realism {

// --- calendar helpers (timezone-naive) ---

// Days since 1970-01-01 for a civil date.
long long days_from_civil(int year, int month, int day);
void civil_from_days(long long days, int& year, int& month, int& day);

// Parses "M/D/YYYY HH:MM" to minutes since 1970-01-01. Returns nullopt on
// malformed input.
std::optional<long long> parse_timestamp(const std::string& text);
std::string format_timestamp(long long minutes);

// --- trips ---

struct TripRecord {
  std::string trip_id;
  long long start_minute = 0;  // minutes since epoch
  long long end_minute = 0;
  double distance_m = 0.0;
  double duration_s = 0.0;
  double start_lon = 0.0, start_lat = 0.0;
  double end_lon = 0.0, end_lat = 0.0;
  std::string operator_label;

  bool operator==(const TripRecord&) const = default;
};

struct TripParseResult {
  std::vector<TripRecord> trips;
  long long skipped = 0;
};

// Reads the trip CSV schema {trip_id, start_time, end_time, trip_distance_m,
// trip_duration_s, start_lon, start_lat, end_lon, end_lat, operator}.
// Column order and case do not matter. A missing column is a hard error;
// a malformed row is skipped and counted.
TripParseResult parse_trips(std::istream& in);
TripParseResult parse_trips_file(const std::string& path);

void serialize_trips(std::ostream& out, const std::vector<TripRecord>& trips);

// --- regions ---

struct RegionMap {
  std::vector<double> lon;  // index == region id
  std::vector<double> lat;

  int size() const { return static_cast<int>(lon.size()); }

  // Regular grid of n centroids, `cols` per row, `cell_km` apart.
  static RegionMap grid(int n, int cols, double cell_km,
                        double origin_lon = -87.65, double origin_lat = 41.85);

  // CSV schema {region_id, lon, lat}; ids must be exactly 0..N-1.
  static RegionMap from_csv(std::istream& in);
  static RegionMap from_csv_file(const std::string& path);
  void to_csv(std::ostream& out) const;

  // Pairwise centroid distances, equirectangular approximation.
  std::vector<double> distance_matrix_km() const;
};

// Nearest centroid by squared Euclidean distance in (lon, lat) degrees;
// ties break to the lowest region id.
int assign_region(double lon, double lat, const RegionMap& map);

// --- datasets ---

struct DemandDataset {
  int num_operators = 0;
  int num_regions = 0;
  int slots_per_day = 24;
  int num_days = 0;
  long long first_day = 0;  // days since epoch of slot 0
  std::vector<std::string> operators;
  std::vector<DemandTensor> tensors;       // num_days * slots_per_day entries
  std::vector<double> mean_duration_s;     // [(m*N + i)*N + j]

  int num_slots() const { return num_days * slots_per_day; }
  const DemandTensor& tensor(int slot) const { return tensors[slot]; }
  double duration_s(int m, int i, int j) const {
    return mean_duration_s[(static_cast<size_t>(m) * num_regions + i) * num_regions + j];
  }
  int operator_index(const std::string& label) const;
  long long total_demand() const;
};

struct BuildStats {
  long long used = 0;
  long long skipped = 0;  // outside the configured date range
};

// Buckets trips into per-slot OD tensors. Operators are enumerated from the
// distinct labels, sorted. The covered day range defaults to [min, max] of
// the trip start days; pass first_day/num_days to pin it, in which case
// out-of-range trips are skipped and counted.
DemandDataset build_demand(const std::vector<TripRecord>& trips, const RegionMap& map,
                           int slots_per_day, BuildStats* stats = nullptr,
                           std::optional<long long> first_day = std::nullopt,
                           std::optional<int> num_days = std::nullopt);

// Historical per-(operator, OD pair, slot-of-day) mean demand.
class DemandPredictor {
 public:
  DemandPredictor() = default;
  explicit DemandPredictor(const DemandDataset& dataset);

  int horizon_regions() const { return num_regions_; }

  // Mean OD matrix (N*N doubles) for each of the h slots starting at
  // `slot`, wrapping by slot-of-day.
  std::vector<std::vector<double>> predict(int op, int slot, int h) const;

  // Operator's predicted city-wide total for one slot-of-day.
  double city_total(int op, int slot_of_day) const;

 private:
  int num_operators_ = 0, num_regions_ = 0, slots_per_day_ = 0;
  std::vector<double> mean_;  // [((sod*M + m)*N + i)*N + j]
};

// --- synthetic demand ---

struct SynthConfig {
  std::vector<std::string> operators;
  int num_regions = 0;
  int days = 0;
  int slots_per_day = 24;
  std::uint64_t seed = 0;
  std::vector<double> rates;       // [(m*N + i)*N + j], mean trips per slot at weight 1
  std::vector<double> profile;     // slots_per_day weights
  std::vector<double> duration_s;  // [i*N + j], mean trip duration

  void validate() const;
};

// Draws each cell from a Poisson distribution with mean rate*profile using
// a counter-based generator, so the same seed always yields the same
// dataset regardless of evaluation order.
DemandDataset synth_demand(const SynthConfig& config, long long first_day = 19000);

// Expands a dataset back into trip records (used by the synth CLI command).
std::vector<TripRecord> dataset_to_trips(const DemandDataset& dataset, const RegionMap& map);

}  // namespace realism
