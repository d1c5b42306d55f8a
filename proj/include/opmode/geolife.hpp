#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opmode/errors.hpp"

namespace opmode {

// The four transportation classes kept for classification, in canonical
// order. Car and taxi collapse into one class.
enum class Mode { walk, bike, bus, car_taxi };

inline constexpr Mode kAllModes[] = {Mode::walk, Mode::bike, Mode::bus, Mode::car_taxi};

const char* to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

// Map a raw label ("walk", "car", "taxi", ...) onto its canonical
// class; nullopt for modes outside the four kept classes.
std::optional<Mode> canonical_mode(std::string_view raw_label);

// One GPS fix. Timestamps are naive seconds since the Unix epoch parsed
// from the file's local date and time fields; altitude is dropped at
// parse time.
struct GpsPoint {
    double latitude;
    double longitude;
    std::int64_t timestamp;

    bool operator==(const GpsPoint&) const = default;
};

// One row of a labels file. The raw mode string is preserved verbatim
// so unstated modes can be filtered later.
struct LabelInterval {
    std::int64_t start;
    std::int64_t end;
    std::string mode;
};

// A maximal run of GPS points covered by a single label interval.
struct Trajectory {
    std::string id;       // "<user>-<counter>", unique within one ingest
    std::string user_id;
    Mode mode;
    std::vector<GpsPoint> points;  // >= 10, timestamps nondecreasing
};

// The three per-trajectory signal series.
struct SignalBundle {
    std::vector<double> latitude;
    std::vector<double> longitude;
    std::vector<double> distance;  // per-step, length = points - 1
};

enum class DistanceMetric { euclidean_degrees, haversine_meters };

const char* to_string(DistanceMetric metric);
std::optional<DistanceMetric> distance_metric_from_string(std::string_view name);

// --- timestamp helpers ------------------------------------------------

// Naive civil time <-> seconds since 1970-01-01 (proleptic Gregorian,
// no time zone).
std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second);
void epoch_to_civil(std::int64_t t, int& year, int& month, int& day, int& hour, int& minute,
                    int& second);

// --- file parsing -----------------------------------------------------

// Parse one PLT file: 6 header lines, then records
//   lat,lon,0,altitude_feet,days_since_1899,yyyy-MM-dd,HH:mm:ss
// Altitude and the serial date are validated as numeric and dropped.
std::vector<GpsPoint> parse_plt(std::string_view content);

// Render one point back to a PLT record line (unused fields zeroed);
// parsing the result recovers (lat, lon, timestamp) exactly.
std::string format_plt_record(const GpsPoint& point);

// Parse a labels file: a "Start Time\tEnd Time\tTransportation Mode"
// header, then tab-separated records with yyyy/MM/dd HH:mm:ss times.
std::vector<LabelInterval> parse_labels(std::string_view content);

// --- segmentation -----------------------------------------------------

struct SegmentStats {
    std::map<Mode, std::size_t> dropped_short;  // candidates under 10 points
    std::size_t dropped_other_mode = 0;         // candidates outside the four classes
    std::size_t unlabeled_points = 0;           // points in no interval

    void merge(const SegmentStats& other);
};

// Cut a user's time-sorted point stream into trajectories: each maximal
// run of consecutive points covered by one label interval becomes a
// candidate. Interval membership is closed on both ends; when intervals
// overlap, the first one in (start, end) order wins, so no point lands
// in two trajectories. Candidates with fewer than 10 points or with a
// non-canonical mode are dropped and counted.
std::vector<Trajectory> segment_trajectories(const std::string& user_id,
                                             std::vector<GpsPoint> points,
                                             std::vector<LabelInterval> labels,
                                             SegmentStats& stats);

// Latitude and longitude verbatim plus the per-step distance series.
// The default metric is the plain Euclidean distance in degree space;
// haversine_meters is available for sensitivity studies.
SignalBundle derive_signals(const Trajectory& trajectory,
                            DistanceMetric metric = DistanceMetric::euclidean_degrees);

// --- directory ingestion ----------------------------------------------

struct IngestReport {
    std::map<Mode, std::size_t> trajectories_per_mode;
    std::size_t total_trajectories = 0;
    SegmentStats stats;
    std::size_t users_processed = 0;
    std::size_t users_without_labels = 0;  // skipped entirely
    std::size_t users_failed = 0;  // labeled users that yielded no usable data
    std::vector<std::string> parse_failures;  // "path: error"
};

struct IngestResult {
    std::vector<Trajectory> trajectories;
    IngestReport report;
};

// Walk a GeoLife-style tree (Data/<user>/Trajectory/*.plt plus
// Data/<user>/labels.txt), concatenate each labeled user's PLT files in
// timestamp order, and segment. Users without a labels file are skipped;
// unreadable files are recorded as parse failures and do not abort the
// run. Throws InvalidInput when the root has no user directories at all.
IngestResult ingest_directory(const std::filesystem::path& root, int jobs = 0);

// --- trajectory store -------------------------------------------------

// Newline-delimited JSON, one trajectory per line:
//   {"id":..., "user":..., "mode":..., "points":[[lat,lon,epoch],...]}
void write_trajectory_store(const std::vector<Trajectory>& trajectories, std::ostream& out);
std::vector<Trajectory> read_trajectory_store(std::istream& in);

std::string ingest_report_json(const IngestReport& report);

}  // namespace opmode
