#include "opmode/geolife.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "opmode/parallel.hpp"
#include "opmode/util.hpp"

namespace opmode {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::walk: return "walk";
        case Mode::bike: return "bike";
        case Mode::bus: return "bus";
        case Mode::car_taxi: return "car_taxi";
    }
    return "?";
}

std::optional<Mode> mode_from_string(std::string_view name) {
    if (name == "walk") return Mode::walk;
    if (name == "bike") return Mode::bike;
    if (name == "bus") return Mode::bus;
    if (name == "car_taxi") return Mode::car_taxi;
    return std::nullopt;
}

std::optional<Mode> canonical_mode(std::string_view raw_label) {
    std::string lower(raw_label);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "walk" || lower == "walking") return Mode::walk;
    if (lower == "bike") return Mode::bike;
    if (lower == "bus") return Mode::bus;
    if (lower == "car" || lower == "taxi") return Mode::car_taxi;
    return std::nullopt;
}

const char* to_string(DistanceMetric metric) {
    return metric == DistanceMetric::euclidean_degrees ? "euclidean" : "haversine";
}

std::optional<DistanceMetric> distance_metric_from_string(std::string_view name) {
    if (name == "euclidean") return DistanceMetric::euclidean_degrees;
    if (name == "haversine") return DistanceMetric::haversine_meters;
    return std::nullopt;
}

// --- timestamps -------------------------------------------------------

namespace {

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
        static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

}  // namespace

std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second) {
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
        hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59) {
        throw InvalidInput("invalid civil time");
    }
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

void epoch_to_civil(std::int64_t t, int& year, int& month, int& day, int& hour, int& minute,
                    int& second) {
    std::int64_t days = t / 86400;
    std::int64_t rest = t % 86400;
    if (rest < 0) {
        rest += 86400;
        --days;
    }
    civil_from_days(days, year, month, day);
    hour = static_cast<int>(rest / 3600);
    minute = static_cast<int>((rest % 3600) / 60);
    second = static_cast<int>(rest % 60);
}

// --- parsing helpers --------------------------------------------------

namespace {

bool parse_fixed_uint(std::string_view text, std::size_t offset, std::size_t digits,
                      int& value) {
    if (offset + digits > text.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < digits; ++i) {
        const char c = text[offset + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    value = v;
    return true;
}

// "yyyy-MM-dd" / "yyyy/MM/dd" plus "HH:mm:ss".
bool parse_civil(std::string_view date, char date_sep, std::string_view time,
                 std::int64_t& epoch) {
    int y, mo, d, h, mi, s;
    if (date.size() != 10 || time.size() != 8) return false;
    if (date[4] != date_sep || date[7] != date_sep) return false;
    if (time[2] != ':' || time[5] != ':') return false;
    if (!parse_fixed_uint(date, 0, 4, y) || !parse_fixed_uint(date, 5, 2, mo) ||
        !parse_fixed_uint(date, 8, 2, d) || !parse_fixed_uint(time, 0, 2, h) ||
        !parse_fixed_uint(time, 3, 2, mi) || !parse_fixed_uint(time, 6, 2, s)) {
        return false;
    }
    try {
        epoch = civil_to_epoch(y, mo, d, h, mi, s);
    } catch (const InvalidInput&) {
        return false;
    }
    return true;
}

}  // namespace

// --- PLT files --------------------------------------------------------

std::vector<GpsPoint> parse_plt(std::string_view content) {
    std::vector<GpsPoint> points;
    LineCursor cursor{content};
    std::string_view line;

    for (int i = 0; i < 6; ++i) {
        if (!cursor.next(line)) return points;  // header-only or shorter
    }

    while (cursor.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_view(line, ',');
        if (fields.size() != 7) {
            throw ParseError("expected 7 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             cursor.line_number);
        }
        GpsPoint p{};
        double altitude, serial;
        if (!parse_double_token(fields[0], p.latitude) ||
            !parse_double_token(fields[1], p.longitude)) {
            throw ParseError("malformed coordinate", cursor.line_number);
        }
        double flag;
        if (!parse_double_token(fields[2], flag) || !parse_double_token(fields[3], altitude) ||
            !parse_double_token(fields[4], serial)) {
            throw ParseError("malformed numeric field", cursor.line_number);
        }
        if (!parse_civil(fields[5], '-', fields[6], p.timestamp)) {
            throw ParseError("malformed date or time field", cursor.line_number);
        }
        if (p.latitude < -90.0 || p.latitude > 90.0) {
            throw ValidationError("latitude " + std::to_string(p.latitude) +
                                      " out of range [-90, 90]",
                                  cursor.line_number);
        }
        if (p.longitude < -180.0 || p.longitude > 180.0) {
            throw ValidationError("longitude " + std::to_string(p.longitude) +
                                      " out of range [-180, 180]",
                                  cursor.line_number);
        }
        points.push_back(p);
    }
    return points;
}

std::string format_plt_record(const GpsPoint& point) {
    int y, mo, d, h, mi, s;
    epoch_to_civil(point.timestamp, y, mo, d, h, mi, s);
    char tail[32];
    std::snprintf(tail, sizeof(tail), "%04d-%02d-%02d,%02d:%02d:%02d", y, mo, d, h, mi, s);
    return shortest_double(point.latitude) + "," + shortest_double(point.longitude) +
           ",0,0,0," + tail;
}

// --- labels files -----------------------------------------------------

std::vector<LabelInterval> parse_labels(std::string_view content) {
    std::vector<LabelInterval> intervals;
    LineCursor cursor{content};
    std::string_view line;

    if (!cursor.next(line)) return intervals;
    if (trim_view(line) != "Start Time\tEnd Time\tTransportation Mode") {
        throw ParseError("missing labels header", cursor.line_number);
    }

    while (cursor.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_view(line, '\t');
        if (fields.size() != 3) {
            throw ParseError("expected 3 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             cursor.line_number);
        }
        LabelInterval interval;
        const auto start_fields = split_view(trim_view(fields[0]), ' ');
        const auto end_fields = split_view(trim_view(fields[1]), ' ');
        if (start_fields.size() != 2 ||
            !parse_civil(start_fields[0], '/', start_fields[1], interval.start)) {
            throw ParseError("malformed start time", cursor.line_number);
        }
        if (end_fields.size() != 2 ||
            !parse_civil(end_fields[0], '/', end_fields[1], interval.end)) {
            throw ParseError("malformed end time", cursor.line_number);
        }
        if (interval.end < interval.start) {
            throw ValidationError("label interval ends before it starts",
                                  cursor.line_number);
        }
        interval.mode = std::string(trim_view(fields[2]));
        intervals.push_back(std::move(interval));
    }
    return intervals;
}

// --- segmentation -----------------------------------------------------

void SegmentStats::merge(const SegmentStats& other) {
    for (const auto& [mode, count] : other.dropped_short) {
        dropped_short[mode] += count;
    }
    dropped_other_mode += other.dropped_other_mode;
    unlabeled_points += other.unlabeled_points;
}

namespace {

std::string make_trajectory_id(const std::string& user_id, std::size_t counter) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu", counter);
    return user_id + "-" + buf;
}

}  // namespace

std::vector<Trajectory> segment_trajectories(const std::string& user_id,
                                             std::vector<GpsPoint> points,
                                             std::vector<LabelInterval> labels,
                                             SegmentStats& stats) {
    std::stable_sort(points.begin(), points.end(),
                     [](const GpsPoint& a, const GpsPoint& b) { return a.timestamp < b.timestamp; });
    std::stable_sort(labels.begin(), labels.end(), [](const LabelInterval& a, const LabelInterval& b) {
        return a.start < b.start || (a.start == b.start && a.end < b.end);
    });

    std::vector<Trajectory> trajectories;
    std::size_t counter = 0;
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    std::vector<GpsPoint> run;
    std::size_t run_interval = kNone;

    auto flush = [&] {
        if (run_interval == kNone || run.empty()) {
            run.clear();
            return;
        }
        const auto mode = canonical_mode(labels[run_interval].mode);
        if (!mode) {
            ++stats.dropped_other_mode;
        } else if (run.size() < 10) {
            ++stats.dropped_short[*mode];
        } else {
            Trajectory t;
            t.id = make_trajectory_id(user_id, ++counter);
            t.user_id = user_id;
            t.mode = *mode;
            t.points = run;
            trajectories.push_back(std::move(t));
        }
        run.clear();
    };

    std::size_t ii = 0;  // first interval whose end is >= current timestamp
    for (const GpsPoint& p : points) {
        while (ii < labels.size() && labels[ii].end < p.timestamp) ++ii;
        std::size_t assigned = kNone;
        if (ii < labels.size() && labels[ii].start <= p.timestamp) assigned = ii;

        if (assigned != run_interval) {
            flush();
            run_interval = assigned;
        }
        if (assigned == kNone) {
            ++stats.unlabeled_points;
        } else {
            run.push_back(p);
        }
    }
    flush();
    return trajectories;
}

// --- signals ----------------------------------------------------------

namespace {

double haversine_meters(const GpsPoint& a, const GpsPoint& b) {
    constexpr double kEarthRadius = 6371000.0;
    constexpr double kRad = std::numbers::pi / 180.0;
    const double dlat = (b.latitude - a.latitude) * kRad;
    const double dlon = (b.longitude - a.longitude) * kRad;
    const double s1 = std::sin(0.5 * dlat);
    const double s2 = std::sin(0.5 * dlon);
    const double h = s1 * s1 +
                     std::cos(a.latitude * kRad) * std::cos(b.latitude * kRad) * s2 * s2;
    return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace

SignalBundle derive_signals(const Trajectory& trajectory, DistanceMetric metric) {
    SignalBundle bundle;
    const auto& pts = trajectory.points;
    bundle.latitude.reserve(pts.size());
    bundle.longitude.reserve(pts.size());
    bundle.distance.reserve(pts.size() > 0 ? pts.size() - 1 : 0);
    for (const GpsPoint& p : pts) {
        bundle.latitude.push_back(p.latitude);
        bundle.longitude.push_back(p.longitude);
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (metric == DistanceMetric::euclidean_degrees) {
            const double dlat = pts[i + 1].latitude - pts[i].latitude;
            const double dlon = pts[i + 1].longitude - pts[i].longitude;
            bundle.distance.push_back(std::sqrt(dlat * dlat + dlon * dlon));
        } else {
            bundle.distance.push_back(haversine_meters(pts[i], pts[i + 1]));
        }
    }
    return bundle;
}

// --- directory ingestion ----------------------------------------------

namespace {

struct UserIngest {
    std::vector<Trajectory> trajectories;
    SegmentStats stats;
    std::vector<std::string> failures;
    bool labeled = false;
    bool failed = false;
};

UserIngest ingest_user(const std::filesystem::path& user_dir) {
    UserIngest result;
    const auto labels_path = user_dir / "labels.txt";
    if (!std::filesystem::exists(labels_path)) {
        return result;  // unlabeled user, skipped
    }
    result.labeled = true;

    std::vector<LabelInterval> labels;
    try {
        labels = parse_labels(read_file(labels_path));
    } catch (const Error& e) {
        result.failures.push_back(labels_path.string() + ": " + e.what());
        result.failed = true;
        return result;
    }

    std::vector<std::filesystem::path> plt_files;
    const auto traj_dir = user_dir / "Trajectory";
    if (std::filesystem::is_directory(traj_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(traj_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".plt") {
                plt_files.push_back(entry.path());
            }
        }
    }
    std::sort(plt_files.begin(), plt_files.end());

    std::vector<GpsPoint> points;
    std::size_t files_ok = 0;
    for (const auto& file : plt_files) {
        try {
            auto file_points = parse_plt(read_file(file));
            points.insert(points.end(), file_points.begin(), file_points.end());
            ++files_ok;
        } catch (const Error& e) {
            result.failures.push_back(file.string() + ": " + e.what());
        }
    }
    if (!plt_files.empty() && files_ok == 0) {
        result.failed = true;
        return result;
    }

    result.trajectories = segment_trajectories(user_dir.filename().string(),
                                               std::move(points), std::move(labels),
                                               result.stats);
    return result;
}

}  // namespace

IngestResult ingest_directory(const std::filesystem::path& root, int jobs) {
    auto data_dir = root / "Data";
    if (!std::filesystem::is_directory(data_dir)) {
        data_dir = root;
    }

    std::vector<std::filesystem::path> user_dirs;
    if (std::filesystem::is_directory(data_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
            if (entry.is_directory()) {
                user_dirs.push_back(entry.path());
            }
        }
    }
    std::sort(user_dirs.begin(), user_dirs.end());
    if (user_dirs.empty()) {
        throw InvalidInput("no users found under " + data_dir.string());
    }

    std::vector<UserIngest> per_user(user_dirs.size());
    parallel_for(user_dirs.size(), jobs,
                 [&](std::size_t i) { per_user[i] = ingest_user(user_dirs[i]); });

    IngestResult result;
    for (auto& user : per_user) {
        if (!user.labeled) {
            ++result.report.users_without_labels;
            continue;
        }
        ++result.report.users_processed;
        if (user.failed) ++result.report.users_failed;
        result.report.stats.merge(user.stats);
        for (auto& failure : user.failures) {
            result.report.parse_failures.push_back(std::move(failure));
        }
        for (auto& t : user.trajectories) {
            ++result.report.trajectories_per_mode[t.mode];
            result.trajectories.push_back(std::move(t));
        }
    }
    result.report.total_trajectories = result.trajectories.size();
    return result;
}

// --- trajectory store -------------------------------------------------

void write_trajectory_store(const std::vector<Trajectory>& trajectories, std::ostream& out) {
    for (const auto& t : trajectories) {
        nlohmann::json record;
        record["id"] = t.id;
        record["user"] = t.user_id;
        record["mode"] = to_string(t.mode);
        nlohmann::json points = nlohmann::json::array();
        for (const GpsPoint& p : t.points) {
            points.push_back({p.latitude, p.longitude, p.timestamp});
        }
        record["points"] = std::move(points);
        out << record.dump() << '\n';
    }
}

std::vector<Trajectory> read_trajectory_store(std::istream& in) {
    std::vector<Trajectory> trajectories;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad trajectory record: ") + e.what(), line_number);
        }
        Trajectory t;
        try {
            t.id = record.at("id").get<std::string>();
            t.user_id = record.at("user").get<std::string>();
            const auto mode = mode_from_string(record.at("mode").get<std::string>());
            if (!mode) {
                throw ParseError("unknown mode in trajectory record", line_number);
            }
            t.mode = *mode;
            for (const auto& p : record.at("points")) {
                t.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                    p.at(2).get<std::int64_t>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad trajectory record: ") + e.what(), line_number);
        }
        trajectories.push_back(std::move(t));
    }
    return trajectories;
}

std::string ingest_report_json(const IngestReport& report) {
    nlohmann::json j;
    nlohmann::json per_mode;
    for (Mode mode : kAllModes) {
        const auto it = report.trajectories_per_mode.find(mode);
        per_mode[to_string(mode)] = it == report.trajectories_per_mode.end() ? 0 : it->second;
    }
    j["trajectories_per_mode"] = std::move(per_mode);
    j["total_trajectories"] = report.total_trajectories;
    nlohmann::json dropped;
    for (Mode mode : kAllModes) {
        const auto it = report.stats.dropped_short.find(mode);
        dropped[to_string(mode)] = it == report.stats.dropped_short.end() ? 0 : it->second;
    }
    j["dropped_short_per_mode"] = std::move(dropped);
    j["dropped_other_mode"] = report.stats.dropped_other_mode;
    j["unlabeled_points"] = report.stats.unlabeled_points;
    j["users_processed"] = report.users_processed;
    j["users_without_labels"] = report.users_without_labels;
    j["users_failed"] = report.users_failed;
    j["parse_failures"] = report.parse_failures;
    return j.dump(2) + "\n";
}

}  // namespace opmode
