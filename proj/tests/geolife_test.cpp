#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "opmode/errors.hpp"
#include "opmode/geolife.hpp"

using namespace opmode;

namespace {

std::filesystem::path fixtures_dir() {
    const char* env = std::getenv("OPMODE_FIXTURES");
    REQUIRE(env != nullptr);
    return std::filesystem::path(env);
}

const std::string kPltHeader =
    "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n"
    "0,2,255,My Track,0,0,2,8421376\n0\n";

GpsPoint point(double lat, double lon, std::int64_t t) { return {lat, lon, t}; }

LabelInterval interval(std::int64_t start, std::int64_t end, std::string mode) {
    return {start, end, std::move(mode)};
}

}  // namespace

TEST_CASE("mode names round-trip") {
    for (Mode mode : kAllModes) {
        CHECK(mode_from_string(to_string(mode)) == mode);
    }
    CHECK(!mode_from_string("train"));
    CHECK(canonical_mode("walk") == Mode::walk);
    CHECK(canonical_mode("Walk") == Mode::walk);
    CHECK(canonical_mode("walking") == Mode::walk);
    CHECK(canonical_mode("car") == Mode::car_taxi);
    CHECK(canonical_mode("taxi") == Mode::car_taxi);
    CHECK(canonical_mode("TAXI") == Mode::car_taxi);
    CHECK(!canonical_mode("train"));
    CHECK(!canonical_mode("subway"));
    CHECK(!canonical_mode(""));
}

TEST_CASE("civil time conversions") {
    CHECK(civil_to_epoch(1970, 1, 1, 0, 0, 0) == 0);
    CHECK(civil_to_epoch(1970, 1, 2, 0, 0, 0) == 86400);
    CHECK(civil_to_epoch(2008, 10, 23, 2, 53, 4) == 1224730384);
    CHECK(civil_to_epoch(2000, 2, 29, 12, 0, 0) == 951825600);
    CHECK_THROWS_AS(civil_to_epoch(2001, 2, 29, 0, 0, 0), InvalidInput);
    CHECK_THROWS_AS(civil_to_epoch(2008, 13, 1, 0, 0, 0), InvalidInput);
    CHECK_THROWS_AS(civil_to_epoch(2008, 4, 31, 0, 0, 0), InvalidInput);
    CHECK_THROWS_AS(civil_to_epoch(2008, 1, 1, 24, 0, 0), InvalidInput);
    CHECK_THROWS_AS(civil_to_epoch(2008, 1, 1, 0, 60, 0), InvalidInput);

    std::mt19937_64 rng(47);
    std::uniform_int_distribution<std::int64_t> stamp(-2208988800LL, 4102444800LL);
    for (int round = 0; round < 2000; ++round) {
        const std::int64_t t = stamp(rng);
        int y, mo, d, h, mi, s;
        epoch_to_civil(t, y, mo, d, h, mi, s);
        CHECK(civil_to_epoch(y, mo, d, h, mi, s) == t);
    }
}

TEST_CASE("plt parsing") {
    const std::string body =
        "39.906631,116.385564,0,492,39744.1202,2008-10-23,02:53:04\n"
        "39.906554,116.385625,0,492,39744.1203,2008-10-23,02:53:10\n";
    const auto points = parse_plt(kPltHeader + body);
    REQUIRE(points.size() == 2);
    CHECK(points[0].latitude == 39.906631);
    CHECK(points[0].longitude == 116.385564);
    CHECK(points[0].timestamp == 1224730384);
    CHECK(points[1].timestamp == 1224730390);

    // a file with fewer than six header lines yields nothing
    CHECK(parse_plt("Geolife trajectory\nWGS 84\n").empty());
    CHECK(parse_plt(kPltHeader).empty());

    // blank lines are tolerated, CRLF too
    CHECK(parse_plt(kPltHeader + "\n" + body + "\n").size() == 2);
    std::string crlf = kPltHeader + body;
    std::string with_cr;
    for (char c : crlf) {
        if (c == '\n') with_cr += "\r\n"; else with_cr += c;
    }
    CHECK(parse_plt(with_cr).size() == 2);
}

TEST_CASE("plt parse errors carry line numbers") {
    const auto expect_line = [](const std::string& body, std::size_t line) {
        try {
            parse_plt(kPltHeader + body);
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
        } catch (const ValidationError& e) {
            CHECK(e.line() == line);
        }
    };
    expect_line("39.9,116.3,0,492,39744.1,2008-10-23\n", 7);  // 6 fields
    expect_line("39.9,116.3,0,492,39744.1,2008-10-23,02:53:04,extra\n", 7);
    expect_line("abc,116.3,0,492,39744.1,2008-10-23,02:53:04\n", 7);
    expect_line("39.9,116.3,zz,492,39744.1,2008-10-23,02:53:04\n", 7);
    expect_line("39.9,116.3,0,492,39744.1,2008/10/23,02:53:04\n", 7);  // wrong separator
    expect_line("39.9,116.3,0,492,39744.1,2008-02-30,02:53:04\n", 7);  // bad day
    expect_line("39.9,116.3,0,492,39744.1,2008-10-23,25:00:00\n", 7);
    expect_line("95.0,116.3,0,492,39744.1,2008-10-23,02:53:04\n", 7);   // lat range
    expect_line("39.9,216.3,0,492,39744.1,2008-10-23,02:53:04\n", 7);   // lon range
    const std::string good = "39.9,116.3,0,492,39744.1,2008-10-23,02:53:04\n";
    expect_line(good + "39.9,116.3,0,492,39744.1,2008-10-23\n", 8);
}

TEST_CASE("plt record formatting round-trips") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
    std::uniform_int_distribution<std::int64_t> stamp(0, 2000000000LL);
    for (int round = 0; round < 500; ++round) {
        const GpsPoint p = point(lat(rng), lon(rng), stamp(rng));
        const auto parsed = parse_plt(kPltHeader + format_plt_record(p) + "\n");
        REQUIRE(parsed.size() == 1);
        CHECK(parsed[0] == p);
    }
    CHECK(format_plt_record(point(39.9, 116.3, 1224730384)) ==
          "39.9,116.3,0,0,0,2008-10-23,02:53:04");
}

TEST_CASE("labels parsing") {
    const std::string content =
        "Start Time\tEnd Time\tTransportation Mode\n"
        "2008/10/23 02:53:04\t2008/10/23 02:53:30\twalk\n"
        "2008/10/23 02:54:00\t2008/10/23 02:54:30\tSubway Train\n";
    const auto labels = parse_labels(content);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].start == 1224730384);
    CHECK(labels[0].end == 1224730410);
    CHECK(labels[0].mode == "walk");
    CHECK(labels[1].mode == "Subway Train");

    CHECK(parse_labels("Start Time\tEnd Time\tTransportation Mode\n").empty());
    CHECK_THROWS_AS(parse_labels("start\tend\tmode\nx\ty\tz\n"), ParseError);
    CHECK_THROWS_AS(parse_labels("Start Time\tEnd Time\tTransportation Mode\n"
                                 "2008/10/23 02:53:04\twalk\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_labels("Start Time\tEnd Time\tTransportation Mode\n"
                                 "2008-10-23 02:53:04\t2008-10-23 02:53:30\twalk\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_labels("Start Time\tEnd Time\tTransportation Mode\n"
                                 "2008/10/23 02:53:30\t2008/10/23 02:53:04\twalk\n"),
                    ValidationError);
}

TEST_CASE("segmentation splits runs on interval changes") {
    std::vector<GpsPoint> points;
    for (int i = 0; i < 12; ++i) points.push_back(point(39.9, 116.3, 100 + i));
    for (int i = 0; i < 11; ++i) points.push_back(point(39.9, 116.3, 200 + i));
    std::vector<LabelInterval> labels = {interval(100, 111, "walk"),
                                         interval(200, 210, "bus")};
    SegmentStats stats;
    const auto result = segment_trajectories("u09", points, labels, stats);
    REQUIRE(result.size() == 2);
    CHECK(result[0].id == "u09-00001");
    CHECK(result[0].mode == Mode::walk);
    CHECK(result[0].points.size() == 12);
    CHECK(result[1].id == "u09-00002");
    CHECK(result[1].mode == Mode::bus);
    CHECK(result[1].points.size() == 11);
    CHECK(stats.dropped_other_mode == 0);
    CHECK(stats.unlabeled_points == 0);
    CHECK(stats.dropped_short.empty());
}

TEST_CASE("segmentation drops short and non-canonical candidates") {
    std::vector<GpsPoint> points;
    for (int i = 0; i < 9; ++i) points.push_back(point(39.9, 116.3, 100 + i));   // short walk
    for (int i = 0; i < 10; ++i) points.push_back(point(39.9, 116.3, 200 + i));  // train
    for (int i = 0; i < 10; ++i) points.push_back(point(39.9, 116.3, 300 + i));  // taxi
    for (int i = 0; i < 3; ++i) points.push_back(point(39.9, 116.3, 400 + i));   // unlabeled
    std::vector<LabelInterval> labels = {interval(100, 108, "walk"),
                                         interval(200, 209, "train"),
                                         interval(300, 309, "taxi")};
    SegmentStats stats;
    const auto result = segment_trajectories("u09", points, labels, stats);
    REQUIRE(result.size() == 1);
    CHECK(result[0].mode == Mode::car_taxi);
    CHECK(result[0].id == "u09-00001");  // counter skips dropped candidates
    CHECK(stats.dropped_short.at(Mode::walk) == 1);
    CHECK(stats.dropped_other_mode == 1);
    CHECK(stats.unlabeled_points == 3);
}

TEST_CASE("a gap in coverage splits a run within one interval pair") {
    // same interval resumes after unlabeled points: two candidates
    std::vector<GpsPoint> points;
    for (int i = 0; i < 10; ++i) points.push_back(point(39.9, 116.3, 100 + i));
    points.push_back(point(39.9, 116.3, 150));  // outside every interval
    for (int i = 0; i < 10; ++i) points.push_back(point(39.9, 116.3, 160 + i));
    std::vector<LabelInterval> labels = {interval(100, 109, "walk"),
                                         interval(160, 169, "walk")};
    SegmentStats stats;
    const auto result = segment_trajectories("u09", points, labels, stats);
    REQUIRE(result.size() == 2);
    CHECK(result[0].points.back().timestamp == 109);
    CHECK(result[1].points.front().timestamp == 160);
    CHECK(stats.unlabeled_points == 1);
}

TEST_CASE("overlapping intervals give each point to the first") {
    std::vector<GpsPoint> points;
    for (int i = 0; i <= 20; ++i) points.push_back(point(39.9, 116.3, 100 + i));
    // both intervals contain 110; the first in (start, end) order wins
    std::vector<LabelInterval> labels = {interval(100, 110, "walk"),
                                         interval(110, 120, "bike")};
    SegmentStats stats;
    const auto result = segment_trajectories("u09", points, labels, stats);
    REQUIRE(result.size() == 2);
    CHECK(result[0].mode == Mode::walk);
    CHECK(result[0].points.size() == 11);  // 100..110
    CHECK(result[1].mode == Mode::bike);
    CHECK(result[1].points.size() == 10);  // 111..120
    CHECK(stats.unlabeled_points == 0);
}

TEST_CASE("segmentation sorts points by timestamp first") {
    std::vector<GpsPoint> points;
    for (int i = 9; i >= 0; --i) points.push_back(point(39.9 + i * 0.001, 116.3, 100 + i));
    std::vector<LabelInterval> labels = {interval(100, 109, "bike")};
    SegmentStats stats;
    const auto result = segment_trajectories("u09", points, labels, stats);
    REQUIRE(result.size() == 1);
    for (std::size_t i = 0; i + 1 < result[0].points.size(); ++i) {
        CHECK(result[0].points[i].timestamp < result[0].points[i + 1].timestamp);
    }
    CHECK(result[0].points.front().latitude == 39.9);
}

TEST_CASE("derived signals") {
    Trajectory t;
    t.points = {point(39.0, 116.0, 0), point(39.3, 116.4, 1), point(39.3, 116.4, 2)};
    const auto euclid = derive_signals(t);
    CHECK(euclid.latitude == std::vector<double>{39.0, 39.3, 39.3});
    CHECK(euclid.longitude == std::vector<double>{116.0, 116.4, 116.4});
    REQUIRE(euclid.distance.size() == 2);
    CHECK(euclid.distance[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(euclid.distance[1] == 0.0);

    const auto meters = derive_signals(t, DistanceMetric::haversine_meters);
    // one degree of latitude is ~111.19 km on a 6371 km sphere
    Trajectory one_degree;
    one_degree.points = {point(0.0, 0.0, 0), point(1.0, 0.0, 1)};
    const auto d = derive_signals(one_degree, DistanceMetric::haversine_meters).distance[0];
    CHECK(d == doctest::Approx(111194.9266).epsilon(1e-6));
    CHECK(meters.distance[1] == 0.0);
    CHECK(meters.distance[0] > 30000.0);  // .3 lat/.4 lon step is tens of km
}

TEST_CASE("distance metric names round-trip") {
    CHECK(distance_metric_from_string("euclidean") == DistanceMetric::euclidean_degrees);
    CHECK(distance_metric_from_string("haversine") == DistanceMetric::haversine_meters);
    CHECK(!distance_metric_from_string("manhattan"));
    CHECK(to_string(DistanceMetric::euclidean_degrees) == std::string("euclidean"));
    CHECK(to_string(DistanceMetric::haversine_meters) == std::string("haversine"));
}

TEST_CASE("trajectory store round-trips") {
    std::vector<Trajectory> trajectories(2);
    trajectories[0].id = "u01-00001";
    trajectories[0].user_id = "u01";
    trajectories[0].mode = Mode::walk;
    for (int i = 0; i < 12; ++i) {
        trajectories[0].points.push_back(point(39.9 + i * 0.0001, 116.3 - i * 0.0002, 1000 + i));
    }
    trajectories[1].id = "u01-00002";
    trajectories[1].user_id = "u01";
    trajectories[1].mode = Mode::car_taxi;
    for (int i = 0; i < 10; ++i) {
        trajectories[1].points.push_back(point(40.0, 116.0, 2000 + 5 * i));
    }

    std::stringstream store;
    write_trajectory_store(trajectories, store);
    const auto loaded = read_trajectory_store(store);
    REQUIRE(loaded.size() == 2);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].id == trajectories[i].id);
        CHECK(loaded[i].user_id == trajectories[i].user_id);
        CHECK(loaded[i].mode == trajectories[i].mode);
        REQUIRE(loaded[i].points == trajectories[i].points);
    }

    std::stringstream bad("{\"id\":\"x\"\n");
    CHECK_THROWS_AS(read_trajectory_store(bad), ParseError);
    std::stringstream bad_mode(
        "{\"id\":\"x\",\"user\":\"u\",\"mode\":\"train\",\"points\":[[1,2,3]]}\n");
    CHECK_THROWS_AS(read_trajectory_store(bad_mode), ParseError);
}

TEST_CASE("fixture corpus ingests with known counts") {
    const auto root = fixtures_dir() / "geolife";
    REQUIRE(std::filesystem::is_directory(root));
    const auto result = ingest_directory(root, 2);
    const auto& report = result.report;

    CHECK(report.trajectories_per_mode.at(Mode::walk) == 6);
    CHECK(report.trajectories_per_mode.at(Mode::bike) == 5);
    CHECK(report.trajectories_per_mode.at(Mode::bus) == 5);
    CHECK(report.trajectories_per_mode.at(Mode::car_taxi) == 5);
    CHECK(report.total_trajectories == 21);
    CHECK(result.trajectories.size() == 21);
    CHECK(report.stats.dropped_short.at(Mode::bus) == 1);
    CHECK(report.stats.dropped_short.size() == 1);
    CHECK(report.stats.dropped_other_mode == 1);
    CHECK(report.stats.unlabeled_points == 3);
    CHECK(report.users_processed == 3);
    CHECK(report.users_without_labels == 1);
    CHECK(report.users_failed == 1);
    REQUIRE(report.parse_failures.size() == 1);
    CHECK(report.parse_failures[0].find("missing labels header") != std::string::npos);
    CHECK(report.parse_failures[0].find("u04") != std::string::npos);

    // known ids and sizes spot-checked across both users
    CHECK(result.trajectories[0].id == "u01-00001");
    CHECK(result.trajectories[0].mode == Mode::walk);
    CHECK(result.trajectories[0].points.size() == 12);
    CHECK(result.trajectories[12].id == "u01-00013");
    CHECK(result.trajectories[13].id == "u02-00001");
    CHECK(result.trajectories[13].mode == Mode::bike);
    CHECK(result.trajectories[13].points.size() == 16);  // includes the 08:05:00 boundary fix
    CHECK(result.trajectories[14].mode == Mode::walk);
    CHECK(result.trajectories[14].points.size() == 15);
    CHECK(result.trajectories.back().id == "u02-00008");

    // every trajectory respects the floor and is time-ordered
    for (const auto& t : result.trajectories) {
        CHECK(t.points.size() >= 10);
        for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
            CHECK(t.points[i].timestamp <= t.points[i + 1].timestamp);
        }
    }

    // jobs parameter does not change the outcome
    const auto serial = ingest_directory(root, 1);
    REQUIRE(serial.trajectories.size() == result.trajectories.size());
    for (std::size_t i = 0; i < serial.trajectories.size(); ++i) {
        CHECK(serial.trajectories[i].id == result.trajectories[i].id);
        CHECK(serial.trajectories[i].points == result.trajectories[i].points);
    }

    const auto json = nlohmann::json::parse(ingest_report_json(report));
    CHECK(json["trajectories_per_mode"]["walk"] == 6);
    CHECK(json["trajectories_per_mode"]["car_taxi"] == 5);
    CHECK(json["total_trajectories"] == 21);
    CHECK(json["dropped_short_per_mode"]["bus"] == 1);
    CHECK(json["dropped_short_per_mode"]["walk"] == 0);
    CHECK(json["dropped_other_mode"] == 1);
    CHECK(json["unlabeled_points"] == 3);
    CHECK(json["users_processed"] == 3);
    CHECK(json["users_without_labels"] == 1);
    CHECK(json["users_failed"] == 1);
    CHECK(json["parse_failures"].size() == 1);
}

TEST_CASE("ingest rejects a root without users") {
    const auto empty = std::filesystem::temp_directory_path() / "opmode_empty_root";
    std::filesystem::remove_all(empty);
    std::filesystem::create_directories(empty);
    CHECK_THROWS_AS(ingest_directory(empty), InvalidInput);
    std::filesystem::remove_all(empty);
}
