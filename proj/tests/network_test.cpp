#include <doctest.h>

#include <random>
#include <set>

#include "bransport/network.hpp"
#include "test_support.hpp"

using namespace bransport;

TEST_CASE("registration is idempotent") {
    Network net(1e-9);
    PolyCurve c({{0, 0}, {1, 0}, {1, 1}});
    auto p1 = net.register_curve(c);
    auto p2 = net.register_curve(c);
    CHECK(p1 == p2);
    CHECK(net.alive_edge_count() == 2);
}

TEST_CASE("transversal crossing splits both segments") {
    Network net(1e-9);
    net.register_curve(PolyCurve({{-1, 0}, {1, 0}}));
    net.register_curve(PolyCurve({{0, -1}, {0, 1}}));
    CHECK(net.alive_edge_count() == 4);
    CHECK(net.total_length() == doctest::Approx(4.0).epsilon(1e-9));
    // The path of the first curve now has two edges through the crossing.
    CHECK(net.path_of(PolyCurve({{-1, 0}, {1, 0}})).size() == 2);
}

TEST_CASE("reversal gives the reversed edge path") {
    Network net(1e-9);
    PolyCurve c({{0, 0}, {1, 0}, {1, 1}});
    auto fwd = net.register_curve(c);
    auto bwd = net.register_curve(c.reversed());
    REQUIRE(fwd.size() == bwd.size());
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        CHECK(fwd[i].edge == bwd[bwd.size() - 1 - i].edge);
        CHECK(fwd[i].forward != bwd[bwd.size() - 1 - i].forward);
    }
}

TEST_CASE("collinear overlaps merge into shared subedges") {
    Network net(1e-9);
    net.register_curve(PolyCurve({{0, 0}, {2, 0}}));
    net.register_curve(PolyCurve({{1, 0}, {3, 0}}));
    CHECK(net.alive_edge_count() == 3);
    CHECK(net.total_length() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("t-junction splits the touched edge") {
    Network net(1e-9);
    net.register_curve(PolyCurve({{0, 0}, {2, 0}}));
    net.register_curve(PolyCurve({{1, 1}, {1, 0}}));
    CHECK(net.alive_edge_count() == 3);
    CHECK(net.total_length() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("curve leaving the domain ball is rejected") {
    Network net(1e-9, 1.0);
    CHECK_THROWS_AS(net.add_curve(PolyCurve({{0, 0}, {2, 0}})), std::invalid_argument);
}

TEST_CASE("total edge length equals the measure of the union of images") {
    // Curves routed along a fixed segment pool: the union length is the total
    // length of the distinct pool segments used.
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Point> hubs;
        for (int i = 0; i < 5; ++i) hubs.push_back(testsupport::rand_point(rng, 2, 1.0));
        Network net(1e-9);
        std::set<std::pair<int, int>> used;
        std::vector<PolyCurve> curves;
        for (int c = 0; c < 4; ++c) {
            std::vector<Point> vs;
            int at = static_cast<int>(rng() % hubs.size());
            vs.push_back(hubs[static_cast<std::size_t>(at)]);
            for (int s = 0; s < 3; ++s) {
                int nxt = static_cast<int>(rng() % hubs.size());
                if (nxt == at) continue;
                used.insert(std::minmax(at, nxt));
                at = nxt;
                vs.push_back(hubs[static_cast<std::size_t>(at)]);
            }
            if (vs.size() < 2) continue;
            curves.emplace_back(vs);
        }
        double expected = 0;
        for (auto [a, b] : used)
            expected += dist(hubs[static_cast<std::size_t>(a)], hubs[static_cast<std::size_t>(b)]);
        for (const auto& c : curves) net.add_curve(c);
        // Hub stars may cross each other; crossings only split edges and do
        // not change the union length.
        CHECK(net.total_length() ==
              doctest::Approx(expected).epsilon(1e-7).scale(expected + 1));
        for (const auto& c : curves) {
            auto path = net.path_of(c);
            double plen = 0;
            for (const auto& st : path)
                plen += net.edges()[static_cast<std::size_t>(st.edge)].len;
            CHECK(plen == doctest::Approx(c.stopping_time()).epsilon(1e-9));
        }
    }
}
