#include "realism/demand.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "realism/csv.hpp"
#include "realism/rng.hpp"

namespace realism {

long long days_from_civil(int y, int m, int d) {
  // Howard Hinnant's algorithm.
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, int& m, int& d) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long yr = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

std::optional<long long> parse_timestamp(const std::string& text) {
  int month = 0, day = 0, year = 0, hour = 0, minute = 0;
  char tail = 0;
  const int n = std::sscanf(text.c_str(), "%d/%d/%d %d:%d %c", &month, &day, &year,
                            &hour, &minute, &tail);
  if (n != 5) return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31 || year < 1900 || year > 3000 ||
      hour < 0 || hour > 23 || minute < 0 || minute > 59)
    return std::nullopt;
  return days_from_civil(year, month, day) * 1440LL + hour * 60 + minute;
}

std::string format_timestamp(long long minutes) {
  long long days = minutes / 1440;
  long long rem = minutes - days * 1440;
  if (rem < 0) {
    rem += 1440;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d/%d/%d %02d:%02d", m, d, y,
                static_cast<int>(rem / 60), static_cast<int>(rem % 60));
  return buf;
}

namespace {

const char* kTripColumns[] = {"trip_id",    "start_time", "end_time",
                              "trip_distance_m", "trip_duration_s", "start_lon",
                              "start_lat",  "end_lon",    "end_lat", "operator"};

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

TripParseResult parse_trips(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.header.empty()) throw std::runtime_error("trip CSV: missing header row");
  int col[10];
  for (int k = 0; k < 10; ++k) {
    col[k] = table.column(kTripColumns[k]);
    if (col[k] < 0)
      throw std::runtime_error(std::string("trip CSV: missing required column '") +
                               kTripColumns[k] + "'");
  }

  TripParseResult result;
  result.trips.reserve(table.rows.size());
  for (const auto& cells : table.rows) {
    if (cells.size() < table.header.size()) {
      ++result.skipped;
      continue;
    }
    TripRecord t;
    t.trip_id = cells[col[0]];
    const auto start = parse_timestamp(cells[col[1]]);
    const auto end = parse_timestamp(cells[col[2]]);
    const auto dist = parse_double(cells[col[3]]);
    const auto dur = parse_double(cells[col[4]]);
    const auto slon = parse_double(cells[col[5]]);
    const auto slat = parse_double(cells[col[6]]);
    const auto elon = parse_double(cells[col[7]]);
    const auto elat = parse_double(cells[col[8]]);
    t.operator_label = cells[col[9]];
    if (!start || !end || !dist || !dur || !slon || !slat || !elon || !elat ||
        t.operator_label.empty() || *end < *start || *dist < 0.0 || *dur < 0.0) {
      ++result.skipped;
      continue;
    }
    t.start_minute = *start;
    t.end_minute = *end;
    t.distance_m = *dist;
    t.duration_s = *dur;
    t.start_lon = *slon;
    t.start_lat = *slat;
    t.end_lon = *elon;
    t.end_lat = *elat;
    result.trips.push_back(std::move(t));
  }
  return result;
}

TripParseResult parse_trips_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trip CSV: " + path);
  return parse_trips(in);
}

void serialize_trips(std::ostream& out, const std::vector<TripRecord>& trips) {
  out << "trip_id,start_time,end_time,trip_distance_m,trip_duration_s,"
         "start_lon,start_lat,end_lon,end_lat,operator\n";
  for (const auto& t : trips) {
    out << t.trip_id << ',' << format_timestamp(t.start_minute) << ','
        << format_timestamp(t.end_minute) << ',' << fmt_double(t.distance_m) << ','
        << fmt_double(t.duration_s) << ',' << fmt_double(t.start_lon) << ','
        << fmt_double(t.start_lat) << ',' << fmt_double(t.end_lon) << ','
        << fmt_double(t.end_lat) << ',' << t.operator_label << '\n';
  }
}

RegionMap RegionMap::grid(int n, int cols, double cell_km, double origin_lon,
                          double origin_lat) {
  if (n < 1 || cols < 1) throw std::invalid_argument("RegionMap::grid: bad dimensions");
  RegionMap map;
  const double dlat = cell_km / 110.574;
  const double dlon = cell_km / (111.320 * std::cos(origin_lat * M_PI / 180.0));
  for (int k = 0; k < n; ++k) {
    map.lon.push_back(origin_lon + dlon * (k % cols));
    map.lat.push_back(origin_lat + dlat * (k / cols));
  }
  return map;
}

RegionMap RegionMap::from_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const int id_col = table.column("region_id");
  const int lon_col = table.column("lon");
  const int lat_col = table.column("lat");
  if (id_col < 0 || lon_col < 0 || lat_col < 0)
    throw std::runtime_error("region CSV: requires columns region_id, lon, lat");
  const int n = static_cast<int>(table.rows.size());
  if (n < 1) throw std::runtime_error("region CSV: no regions");
  RegionMap map;
  map.lon.assign(n, 0.0);
  map.lat.assign(n, 0.0);
  std::vector<bool> seen(n, false);
  for (const auto& row : table.rows) {
    const auto id = parse_double(row[id_col]);
    const auto lon = parse_double(row[lon_col]);
    const auto lat = parse_double(row[lat_col]);
    if (!id || !lon || !lat) throw std::runtime_error("region CSV: malformed row");
    const int k = static_cast<int>(*id);
    if (k < 0 || k >= n || seen[k])
      throw std::runtime_error("region CSV: ids must be unique and cover 0..N-1");
    seen[k] = true;
    map.lon[k] = *lon;
    map.lat[k] = *lat;
  }
  return map;
}

RegionMap RegionMap::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open region CSV: " + path);
  return from_csv(in);
}

void RegionMap::to_csv(std::ostream& out) const {
  out << "region_id,lon,lat\n";
  for (int k = 0; k < size(); ++k)
    out << k << ',' << fmt_double(lon[k]) << ',' << fmt_double(lat[k]) << '\n';
}

std::vector<double> RegionMap::distance_matrix_km() const {
  const int n = size();
  std::vector<double> dist(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double mean_lat = 0.5 * (lat[i] + lat[j]) * M_PI / 180.0;
      const double dx = (lon[i] - lon[j]) * 111.320 * std::cos(mean_lat);
      const double dy = (lat[i] - lat[j]) * 110.574;
      dist[static_cast<size_t>(i) * n + j] = std::hypot(dx, dy);
    }
  }
  return dist;
}

int assign_region(double lon, double lat, const RegionMap& map) {
  if (map.size() == 0) throw std::invalid_argument("assign_region: empty region map");
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < map.size(); ++k) {
    const double dx = lon - map.lon[k];
    const double dy = lat - map.lat[k];
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

int DemandDataset::operator_index(const std::string& label) const {
  for (size_t m = 0; m < operators.size(); ++m)
    if (operators[m] == label) return static_cast<int>(m);
  return -1;
}

long long DemandDataset::total_demand() const {
  long long sum = 0;
  for (const auto& t : tensors) sum += t.total();
  return sum;
}

DemandDataset build_demand(const std::vector<TripRecord>& trips, const RegionMap& map,
                           int slots_per_day, BuildStats* stats,
                           std::optional<long long> first_day,
                           std::optional<int> num_days) {
  if (trips.empty()) throw std::invalid_argument("build_demand: no trips");
  if (slots_per_day < 1 || 1440 % slots_per_day != 0)
    throw std::invalid_argument("build_demand: slots_per_day must divide 1440");
  const int minutes_per_slot = 1440 / slots_per_day;

  std::set<std::string> labels;
  for (const auto& t : trips) labels.insert(t.operator_label);

  DemandDataset ds;
  ds.operators.assign(labels.begin(), labels.end());
  ds.num_operators = static_cast<int>(ds.operators.size());
  ds.num_regions = map.size();
  ds.slots_per_day = slots_per_day;

  long long lo, hi;
  if (first_day) {
    lo = *first_day;
    hi = lo + (num_days ? *num_days : 1) - 1;
  } else {
    lo = trips.front().start_minute / 1440;
    hi = lo;
    for (const auto& t : trips) {
      lo = std::min(lo, t.start_minute / 1440);
      hi = std::max(hi, t.start_minute / 1440);
    }
    if (num_days) hi = lo + *num_days - 1;
  }
  ds.first_day = lo;
  ds.num_days = static_cast<int>(hi - lo + 1);
  ds.tensors.assign(ds.num_slots(), DemandTensor(ds.num_operators, ds.num_regions));
  for (int s = 0; s < ds.num_slots(); ++s) ds.tensors[s].slot = s;

  const size_t cells = static_cast<size_t>(ds.num_operators) * ds.num_regions * ds.num_regions;
  std::vector<double> duration_sum(cells, 0.0);
  std::vector<long long> duration_count(cells, 0);

  BuildStats local;
  for (const auto& t : trips) {
    const long long day = t.start_minute / 1440;
    if (day < lo || day > hi) {
      ++local.skipped;
      continue;
    }
    const int m = ds.operator_index(t.operator_label);
    const int i = assign_region(t.start_lon, t.start_lat, map);
    const int j = assign_region(t.end_lon, t.end_lat, map);
    const int slot = static_cast<int>((day - lo) * slots_per_day +
                                      (t.start_minute % 1440) / minutes_per_slot);
    ds.tensors[slot].at(m, i, j) += 1;
    const size_t cell = (static_cast<size_t>(m) * ds.num_regions + i) * ds.num_regions + j;
    duration_sum[cell] += t.duration_s;
    duration_count[cell] += 1;
    ++local.used;
  }

  ds.mean_duration_s.assign(cells, 0.0);
  for (size_t c = 0; c < cells; ++c)
    if (duration_count[c] > 0) ds.mean_duration_s[c] = duration_sum[c] / duration_count[c];

  if (stats) *stats = local;
  return ds;
}

DemandPredictor::DemandPredictor(const DemandDataset& dataset)
    : num_operators_(dataset.num_operators),
      num_regions_(dataset.num_regions),
      slots_per_day_(dataset.slots_per_day) {
  if (dataset.num_days < 1)
    throw std::invalid_argument("DemandPredictor: dataset must cover at least one day");
  const size_t per_slot =
      static_cast<size_t>(num_operators_) * num_regions_ * num_regions_;
  mean_.assign(per_slot * slots_per_day_, 0.0);
  for (int s = 0; s < dataset.num_slots(); ++s) {
    const int sod = s % slots_per_day_;
    const auto& t = dataset.tensors[s];
    for (size_t c = 0; c < per_slot; ++c)
      mean_[per_slot * sod + c] += t.counts[c];
  }
  for (double& v : mean_) v /= dataset.num_days;
}

std::vector<std::vector<double>> DemandPredictor::predict(int op, int slot, int h) const {
  if (h < 1) throw std::invalid_argument("DemandPredictor::predict: h must be >= 1");
  const size_t od = static_cast<size_t>(num_regions_) * num_regions_;
  const size_t per_slot = static_cast<size_t>(num_operators_) * od;
  std::vector<std::vector<double>> out(h);
  for (int k = 0; k < h; ++k) {
    const int sod = (slot + k) % slots_per_day_;
    out[k].assign(mean_.begin() + per_slot * sod + od * op,
                  mean_.begin() + per_slot * sod + od * (op + 1));
  }
  return out;
}

double DemandPredictor::city_total(int op, int slot_of_day) const {
  const size_t od = static_cast<size_t>(num_regions_) * num_regions_;
  const size_t per_slot = static_cast<size_t>(num_operators_) * od;
  double sum = 0.0;
  const size_t base = per_slot * (slot_of_day % slots_per_day_) + od * op;
  for (size_t c = 0; c < od; ++c) sum += mean_[base + c];
  return sum;
}

void SynthConfig::validate() const {
  const int m = static_cast<int>(operators.size());
  if (m < 1 || num_regions < 1 || days < 1 || slots_per_day < 1)
    throw std::invalid_argument("SynthConfig: dimensions must be positive");
  if (rates.size() != static_cast<size_t>(m) * num_regions * num_regions)
    throw std::invalid_argument("SynthConfig: rates must have M*N*N entries");
  if (profile.size() != static_cast<size_t>(slots_per_day))
    throw std::invalid_argument("SynthConfig: profile must have slots_per_day entries");
  if (duration_s.size() != static_cast<size_t>(num_regions) * num_regions)
    throw std::invalid_argument("SynthConfig: duration_s must have N*N entries");
  for (double r : rates)
    if (r < 0.0) throw std::invalid_argument("SynthConfig: negative rate");
  for (double w : profile)
    if (w < 0.0) throw std::invalid_argument("SynthConfig: negative profile weight");
}

DemandDataset synth_demand(const SynthConfig& config, long long first_day) {
  config.validate();
  const int M = static_cast<int>(config.operators.size());
  const int N = config.num_regions;

  DemandDataset ds;
  ds.operators = config.operators;
  ds.num_operators = M;
  ds.num_regions = N;
  ds.slots_per_day = config.slots_per_day;
  ds.num_days = config.days;
  ds.first_day = first_day;
  ds.tensors.assign(ds.num_slots(), DemandTensor(M, N));
  ds.mean_duration_s.assign(static_cast<size_t>(M) * N * N, 0.0);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        ds.mean_duration_s[(static_cast<size_t>(m) * N + i) * N + j] =
            config.duration_s[static_cast<size_t>(i) * N + j];

  for (int day = 0; day < config.days; ++day) {
    for (int sod = 0; sod < config.slots_per_day; ++sod) {
      DemandTensor& t = ds.tensors[day * config.slots_per_day + sod];
      t.slot = day * config.slots_per_day + sod;
      const double weight = config.profile[sod];
      if (weight <= 0.0) continue;
      for (int m = 0; m < M; ++m) {
        for (int i = 0; i < N; ++i) {
          for (int j = 0; j < N; ++j) {
            const double rate =
                config.rates[(static_cast<size_t>(m) * N + i) * N + j] * weight;
            if (rate <= 0.0) continue;
            CounterStream stream(mix64(config.seed, static_cast<std::uint64_t>(day),
                                       static_cast<std::uint64_t>(sod),
                                       static_cast<std::uint64_t>(m),
                                       static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(j)));
            t.at(m, i, j) = stream.next_poisson(rate);
          }
        }
      }
    }
  }
  return ds;
}

std::vector<TripRecord> dataset_to_trips(const DemandDataset& dataset, const RegionMap& map) {
  if (map.size() != dataset.num_regions)
    throw std::invalid_argument("dataset_to_trips: region map size mismatch");
  std::vector<TripRecord> trips;
  const int minutes_per_slot = 1440 / dataset.slots_per_day;
  long long seq = 0;
  for (int s = 0; s < dataset.num_slots(); ++s) {
    const auto& t = dataset.tensors[s];
    const long long slot_start =
        (dataset.first_day + s / dataset.slots_per_day) * 1440LL +
        static_cast<long long>(s % dataset.slots_per_day) * minutes_per_slot;
    for (int m = 0; m < dataset.num_operators; ++m) {
      for (int i = 0; i < dataset.num_regions; ++i) {
        for (int j = 0; j < dataset.num_regions; ++j) {
          const int count = t.at(m, i, j);
          const double dur = dataset.duration_s(m, i, j);
          for (int k = 0; k < count; ++k) {
            TripRecord r;
            char id[24];
            std::snprintf(id, sizeof(id), "S%08lld", seq++);
            r.trip_id = id;
            r.start_minute = slot_start + k % minutes_per_slot;
            r.end_minute = r.start_minute + std::llround(dur / 60.0);
            r.duration_s = dur;
            r.distance_m = dur * 3.0;  // nominal scooter pace
            r.start_lon = map.lon[i];
            r.start_lat = map.lat[i];
            r.end_lon = map.lon[j];
            r.end_lat = map.lat[j];
            r.operator_label = dataset.operators[m];
            trips.push_back(std::move(r));
          }
        }
      }
    }
  }
  return trips;
}

}  // namespace realism
