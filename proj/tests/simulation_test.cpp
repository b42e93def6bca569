#include <map>
#include <memory>
#include <regex>
#include <string>

#include "catch_amalgamated.hpp"

#include "pothole/simulation.hpp"

using namespace pothole;

namespace {

const std::string kFixtures = POTHOLE_FIXTURE_DIR;

std::shared_ptr<const StreetNetwork> fixture_network(const std::string& name)
{
    return std::make_shared<const StreetNetwork>(load_network(kFixtures + "/" + name));
}

Scenario fixture_scenario(const std::string& name) { return load_scenario(kFixtures + "/" + name); }

std::vector<std::string> lines_with(const World& w, const std::string& needle)
{
    std::vector<std::string> out;
    for (const auto& l : w.trace_lines()) {
        if (l.find(needle) != std::string::npos) {
            out.push_back(l);
        }
    }
    return out;
}

const char* kMinimalNetwork = R"({
  "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 50, "y": 0}],
  "arcs": [{"id": "ab", "tail": "a", "head": "b", "length_m": 50}]
})";

const char* kMinimalScenario = R"({
  "seed": 1,
  "duration_ms": 8000,
  "vehicles": [{"id": "solo", "arc": "ab", "offset_m": 0, "speed_mps": 10}],
  "pits": [{"arc": "ab", "center_m": 25, "half_length_m": 1, "depth_mm": 30}],
  "access_points": [{"id": "ap", "x": 50, "y": 0, "range_m": 15}]
})";

} // namespace

TEST_CASE("minimal scenario ends with one pothole")
{
    // The car reaches b at 5000 ms, having connected to the AP from 3500 ms
    // (35 m) through 3700 ms. The sweep at b queues one envelope and the
    // same tick uplinks it.
    auto net = std::make_shared<const StreetNetwork>(parse_network(kMinimalNetwork));
    World w(net, parse_scenario(kMinimalScenario));
    w.run();
    REQUIRE(w.server().registry().size() == 1);
    auto rec = w.server().registry().records().front();
    CHECK(rec.arc == "ab");
    CHECK(rec.offset_m == Catch::Approx(25.0).margin(0.5));
    CHECK(rec.depth_mm == 30);
    CHECK(rec.first_seen_ms == 5000);
    CHECK(lines_with(w, "PHASE vehicle=solo ap=ap from=SCANNING to=ASSOCIATING").front().rfind("t=3500 ", 0) == 0);
    CHECK(lines_with(w, "UPLINK").size() == 1);
    CHECK(w.vehicles()[0].pending.empty());
    CHECK(w.vehicles()[0].parked);
}

TEST_CASE("zero duration does nothing")
{
    auto sc = fixture_scenario("city_scenario.json");
    sc.duration_ms = 0;
    World w(fixture_network("city.json"), sc);
    w.run();
    CHECK(w.trace_lines().empty());
    CHECK(w.server().registry().size() == 0);
}

TEST_CASE("same seed, same trace")
{
    auto net = fixture_network("city.json");
    World a(net, fixture_scenario("city_scenario.json"));
    World b(net, fixture_scenario("city_scenario.json"));
    a.run();
    b.run();
    CHECK(a.trace_text() == b.trace_text());
    CHECK(a.server().registry().to_csv() == b.server().registry().to_csv());
}

TEST_CASE("phase-order safety and single delivery")
{
    for (const char* name : {"city", "corridor"}) {
        World w(fixture_network(std::string(name) + ".json"), fixture_scenario(std::string(name) + "_scenario.json"));
        w.run();
        std::map<std::string, std::string> phase;
        std::map<std::string, int> delivered;
        std::regex phase_re(R"(PHASE vehicle=(\S+) ap=\S+ from=\S+ to=(\S+))");
        std::regex lost_re(R"(PHASE_TIMEOUT vehicle=(\S+) )");
        std::regex uplink_re(R"(UPLINK vehicle=(\S+) ap=\S+ envelope=(\d+) phase=(\S+))");
        for (const auto& l : w.trace_lines()) {
            std::smatch m;
            if (std::regex_search(l, m, phase_re)) {
                phase[m[1]] = m[2];
            } else if (std::regex_search(l, m, lost_re)) {
                phase[m[1]] = "LOST";
            } else if (std::regex_search(l, m, uplink_re)) {
                INFO(l);
                REQUIRE(phase[m[1]] == "CONNECTED");
                REQUIRE(m[3] == "CONNECTED");
                REQUIRE(++delivered[m[2]] == 1);
            }
        }
        CHECK(w.server().stats().accepted == w.server().registry().events().size());
    }
}

TEST_CASE("loss mid-drain keeps the delivered prefix and queues the rest")
{
    // Budget 1 per tick and 300 ms phases: the car connects to "mid" at
    // 3300 ms (66 m, the edge of its 6 m range), sends one envelope, leaves
    // range, and the 500 ms silence check fires at 3801 ms.
    auto net = fixture_network("corridor.json");
    auto sc = fixture_scenario("corridor_scenario.json");
    sc.duration_ms = 5000;
    World w(net, sc);
    w.run();
    auto uplinks = lines_with(w, "UPLINK");
    REQUIRE(uplinks.size() == 1);
    CHECK(uplinks[0].rfind("t=3300 UPLINK vehicle=car ap=mid envelope=1 ", 0) == 0);
    auto lost = lines_with(w, "PHASE_TIMEOUT");
    REQUIRE(lost.size() == 1);
    CHECK(lost[0] == "t=3801 PHASE_TIMEOUT vehicle=car ap=mid from=CONNECTED silence=501");
    CHECK(w.server().registry().size() == 1);
    REQUIRE(w.vehicles()[0].pending.size() == 2);
    CHECK(w.vehicles()[0].pending.front().serial == 2);

    SECTION("the remainder goes out at the next access point")
    {
        World full(net, fixture_scenario("corridor_scenario.json"));
        full.run();
        CHECK(full.vehicles()[0].pending.empty());
        CHECK(full.server().registry().size() == 3);
        auto all = lines_with(full, "UPLINK");
        REQUIRE(all.size() == 3);
        CHECK(all[1].find("ap=end envelope=2 ") != std::string::npos);
        CHECK(all[2].find("ap=end envelope=3 ") != std::string::npos);
    }
}

TEST_CASE("uplink without a connection delivers nothing")
{
    auto net = std::make_shared<const StreetNetwork>(parse_network(kMinimalNetwork));
    World w(net, parse_scenario(kMinimalScenario));
    PlainReport r;
    r.location = {"ab", 0};
    w.enqueue_report(0, r);
    CHECK(w.uplink(0, 0) == 0);
    CHECK(w.vehicles()[0].pending.size() == 1);
}

TEST_CASE("warnings reach vehicles within 20 m only")
{
    auto sc = fixture_scenario("plaza_scenario.json");
    sc.duration_ms = 2051;
    World w(fixture_network("plaza.json"), sc);
    w.run();
    auto bc = lines_with(w, "P2P_BROADCAST");
    REQUIRE(bc.size() == 1);
    CHECK(bc[0] == "t=2050 P2P_BROADCAST vehicle=sender arc=we offset=10 receivers=at15,at20");
    CHECK(w.vehicles()[1].warnings.size() == 1);
    CHECK(w.vehicles()[2].warnings.size() == 1);
    CHECK(w.vehicles()[3].warnings.empty());
    CHECK(w.vehicles()[4].warnings.empty());

    SECTION("a repeated warning leaves the cache unchanged")
    {
        auto before = w.vehicles()[1].warnings;
        auto receivers = w.p2p_broadcast(0, {{"we", 10}, 40, 1}, 2100);
        CHECK(receivers == std::vector<std::string>{"at15", "at20"});
        CHECK(w.vehicles()[1].warnings == before);
    }
    SECTION("unknown sender")
    {
        CHECK_THROWS(w.p2p_broadcast(99, {{"we", 10}, 40, 1}, 2100));
    }
}

TEST_CASE("scripted destination changes")
{
    auto net = fixture_network("city.json");
    auto sc = fixture_scenario("city_scenario.json");
    sc.duration_ms = 20000;

    SECTION("clearing mid-route switches to weight display and parks at the next node")
    {
        sc.events.push_back({3000, ScriptedEvent::Kind::dest_change, "v1", std::nullopt});
        World w(net, sc);
        w.run();
        const auto& log = w.vehicles()[0].route_log;
        REQUIRE(log.size() >= 2);
        CHECK(log[log.size() - 2].rfind("DISPLAY t=3000 arc=ab", 0) == 0);
        CHECK(log.back().rfind("DISPLAY t=6000 arc=ab", 0) == 0);
        CHECK(w.vehicles()[0].parked);
        CHECK(w.network().arcs()[w.vehicles()[0].arc].head == "B");
    }
    SECTION("a new destination re-routes from the next node")
    {
        sc.events.push_back({3000, ScriptedEvent::Kind::dest_change, "v2", std::string("A")});
        World w(net, sc);
        w.run();
        auto changes = lines_with(w, "DEST_CHANGE vehicle=v2 dest=A");
        REQUIRE(changes.size() == 1);
        CHECK(changes[0] == "t=3000 DEST_CHANGE vehicle=v2 dest=A anchor=D arcs=2 weight=0 length=195");
        CHECK(lines_with(w, "MOVE vehicle=v2 enter=ca from=C").size() == 1);
    }
}

TEST_CASE("scenario parsing and validation")
{
    auto net = fixture_network("city.json");
    CHECK_THROWS_AS(parse_scenario(R"({"seed": 1})"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"seed": 1, "duration_ms": 10, "bogus": 1})"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"seed": 1, "duration_ms": 10,
        "events": [{"t_ms": 1, "kind": "JUMP", "vehicle": "v"}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"seed": 1, "duration_ms": 10,
        "events": [{"t_ms": 1, "kind": "DEST_CHANGE", "vehicle": "v"}]})"),
                    ParseError);

    auto sc = fixture_scenario("city_scenario.json");
    validate_scenario(sc, *net);
    auto late = sc;
    late.events.push_back({sc.duration_ms + 1, ScriptedEvent::Kind::detect, "v1", std::nullopt});
    CHECK_THROWS_AS(validate_scenario(late, *net), ValidationError);
    auto ghost = sc;
    ghost.vehicles[0].arc = "zz";
    CHECK_THROWS_AS(World(net, ghost), ValidationError);
    auto deep = sc;
    deep.pits[0].pit.center_m = 59.5;
    CHECK_THROWS_AS(validate_scenario(deep, *net), ValidationError);
    auto twin = sc;
    twin.vehicles[1].id = "v1";
    CHECK_THROWS_AS(validate_scenario(twin, *net), ValidationError);
}
