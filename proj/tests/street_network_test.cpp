#include <random>
#include <string>

#include "catch_amalgamated.hpp"

#include "pothole/street_network.hpp"
#include "support/oracles.hpp"

using namespace pothole;

namespace {

const char* kTwoNodes = R"({
  "nodes": [{"id": "u", "x": 0, "y": 0}, {"id": "v", "x": 10, "y": 0}],
  "arcs": [{"id": "a1", "tail": "u", "head": "v", "length_m": 10}]
})";

std::string with_arcs(const std::string& arcs)
{
    return R"({"nodes": [{"id": "u", "x": 0, "y": 0}, {"id": "v", "x": 10, "y": 0}, {"id": "w", "x": 5, "y": 5}],
               "arcs": [)" +
           arcs + "]}";
}

} // namespace

TEST_CASE("minimal network loads")
{
    auto net = parse_network(kTwoNodes);
    CHECK(net.node_count() == 2);
    CHECK(net.arc_count() == 1);
    CHECK(net.arc("a1").length_m == 10.0);
    CHECK(net.arcs_between("u", "v").size() == 1);
}

TEST_CASE("loader rejects bad networks")
{
    SECTION("dangling endpoint")
    {
        CHECK_THROWS_AS(parse_network(with_arcs(R"({"id": "a", "tail": "u", "head": "zz", "length_m": 3})")),
                        ValidationError);
    }
    SECTION("non-positive length")
    {
        CHECK_THROWS_AS(parse_network(with_arcs(R"({"id": "a", "tail": "u", "head": "v", "length_m": 0})")),
                        ValidationError);
        CHECK_THROWS_AS(parse_network(with_arcs(R"({"id": "a", "tail": "u", "head": "v", "length_m": -2})")),
                        ValidationError);
    }
    SECTION("duplicate arc id")
    {
        CHECK_THROWS_AS(parse_network(with_arcs(R"({"id": "a", "tail": "u", "head": "v", "length_m": 3},
                                                   {"id": "a", "tail": "v", "head": "u", "length_m": 3})")),
                        ValidationError);
    }
    SECTION("duplicate node id")
    {
        CHECK_THROWS_AS(parse_network(R"({"nodes": [{"id": "u", "x": 0, "y": 0}, {"id": "u", "x": 1, "y": 0}],
                                          "arcs": []})"),
                        ValidationError);
    }
    SECTION("self-loop")
    {
        CHECK_THROWS_AS(parse_network(with_arcs(R"({"id": "a", "tail": "u", "head": "u", "length_m": 3})")),
                        ValidationError);
    }
    SECTION("unknown key")
    {
        CHECK_THROWS_AS(parse_network(with_arcs(R"({"id": "a", "tail": "u", "head": "v", "length_m": 3, "lanes": 2})")),
                        ParseError);
        CHECK_THROWS_AS(parse_network(R"({"nodes": [], "arcs": [], "extra": 1})"), ParseError);
    }
    SECTION("malformed json")
    {
        CHECK_THROWS_AS(parse_network("{\"nodes\": ["), ParseError);
        CHECK_THROWS_AS(parse_network(R"({"nodes": [{"id": "u", "x": "east", "y": 0}], "arcs": []})"), ParseError);
    }
    SECTION("missing file")
    {
        CHECK_THROWS_AS(load_network("/nonexistent/network.json"), ParseError);
    }
}

TEST_CASE("parallel arcs share one pair entry")
{
    auto net = parse_network(with_arcs(R"({"id": "p7", "tail": "u", "head": "v", "length_m": 7},
                                          {"id": "p5", "tail": "u", "head": "v", "length_m": 5})"));
    auto both = net.arcs_between("u", "v");
    REQUIRE(both.size() == 2);
    CHECK(both[0].id == "p5");
    CHECK(both[1].id == "p7");
}

TEST_CASE("arcs_between is directed and id ordered")
{
    auto net = parse_network(with_arcs(R"({"id": "c", "tail": "u", "head": "v", "length_m": 1},
                                          {"id": "a", "tail": "u", "head": "v", "length_m": 2},
                                          {"id": "b", "tail": "u", "head": "v", "length_m": 3},
                                          {"id": "r", "tail": "v", "head": "u", "length_m": 3})"));
    auto fwd = net.arcs_between("u", "v");
    REQUIRE(fwd.size() == 3);
    CHECK(fwd[0].id == "a");
    CHECK(fwd[1].id == "b");
    CHECK(fwd[2].id == "c");
    auto back = net.arcs_between("v", "u");
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == "r");
    CHECK(net.arcs_between("u", "w").empty());
    CHECK_THROWS_AS(net.arcs_between("u", "nowhere"), NotFound);
}

TEST_CASE("min_weight picks the first sorted entry")
{
    WeightMultiset wm("u", "v");
    wm.set("a2", 7);
    wm.set("a1", 3);
    CHECK(min_weight(wm) == WeightEntry{"a1", 3});

    WeightMultiset tie("u", "v");
    tie.set("a5", 4);
    tie.set("a2", 4);
    CHECK(min_weight(tie) == WeightEntry{"a2", 4});

    WeightMultiset single("u", "v");
    single.set("a9", 0);
    CHECK(min_weight(single) == WeightEntry{"a9", 0});

    CHECK_THROWS_AS(min_weight(WeightMultiset("u", "v")), std::invalid_argument);
}

TEST_CASE("weight multiset stays sorted under random re-weighting")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> arc(0, 9);
    std::uniform_int_distribution<int> w(0, 5);
    WeightMultiset wm("u", "v");
    std::map<std::string, double> truth;
    for (int step = 0; step < 2000; ++step) {
        std::string id = "a" + std::to_string(arc(rng));
        double weight = w(rng);
        wm.set(id, weight);
        truth[id] = weight;
        REQUIRE(wm.is_sorted());
        REQUIRE(wm.size() == truth.size());
        double brute = oracle::kInf;
        for (const auto& [_, v] : truth) {
            brute = std::min(brute, v);
        }
        REQUIRE(min_weight(wm).weight == brute);
    }
}

TEST_CASE("serialize and reload yields the same network")
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto inst = oracle::random_instance(rng);
        auto text = serialize_network(*inst.net);
        auto again = parse_network(text);
        REQUIRE(again == *inst.net);
        REQUIRE(serialize_network(again) == text);
    }
}

TEST_CASE("arc positions interpolate between endpoints")
{
    auto net = parse_network(kTwoNodes);
    auto p = net.position(net.arc_index("a1"), 2.5);
    CHECK(p.x == 2.5);
    CHECK(p.y == 0.0);
}
