#include <doctest.h>

#include <cmath>
#include <random>

#include "genco/market.hpp"
#include "support/curve_oracle.hpp"
#include "support/market_fixture.hpp"

using namespace genco;
using namespace genco::market;
using curves::OfferBlock;
using curves::Owner;

namespace {

curves::SteppedSupplyCurve two_steps() {
    return curves::build_curve({{30, 5, Owner::competitor, "a"}, {40, 10, Owner::genco, "b"}});
}

// Marginal price by walking the price-sorted offers directly.
double reference_price(std::vector<OfferBlock> offers, double demand) {
    std::stable_sort(offers.begin(), offers.end(), [](auto& a, auto& b) {
        return a.price < b.price || (a.price == b.price && a.owner == Owner::genco && b.owner != Owner::genco);
    });
    double run = 0.0;
    for (const auto& o : offers) {
        run += o.quantity;
        if (run >= demand) return o.price;
    }
    return NAN;
}

}  // namespace

TEST_CASE("demand inside a step is priced by that step") {
    const auto r = clear(two_steps(), 10.0);
    CHECK(r.price == 40);
    CHECK(r.dispatched == 10);
    CHECK(r.marginal_block == 1);
    CHECK(r.marginal_owner == Owner::genco);
    CHECK(r.block_dispatch == std::vector<double>{5, 5});
    CHECK(r.genco_quantity == 5);
    CHECK(r.competitor_quantity == 5);
}

TEST_CASE("demand on a step edge is priced by the completing block") {
    const auto c = two_steps();
    CHECK(clear(c, 15.0).price == 40);
    CHECK(clear(c, 5.0).price == 30);
    CHECK(clear(c, 5.0).marginal_block == 0);
    CHECK(clear_binary_search(c, 5.0).price == 30);
    CHECK(clear(c, InelasticDemand{12.0, {}}).price == 40);
}

TEST_CASE("demand above total supply raises a scarcity error") {
    const auto c = two_steps();
    try {
        (void)clear(c, 15.5);
        FAIL("expected scarcity");
    } catch (const ScarcityError& e) {
        CHECK(e.total_supply() == 15);
        CHECK(e.demand() == 15.5);
    }
    CHECK_THROWS_AS(clear_binary_search(c, 100.0), ScarcityError);
    CHECK_THROWS_AS(clear(c, 0.0), InvalidArgument);
    CHECK_THROWS_AS(clear(c, -3.0), InvalidArgument);
    CHECK_THROWS_AS(clear(curves::SteppedSupplyCurve{}, 1.0), InvalidArgument);
}

TEST_CASE("reference market clears at 42 with a producer block marginal") {
    const auto c = curves::build_curve(fixture::market_offers());
    const auto r = clear(c, 24000.0);
    CHECK(r.price == 42);
    CHECK(r.marginal_owner == Owner::genco);
    CHECK(r.dispatched == 24000);
    CHECK(r.genco_quantity + r.competitor_quantity == doctest::Approx(24000));
}

TEST_CASE("linear and binary-search clearing agree on random markets") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        auto offers = oracle::random_offers(rng, 1 + rng() % 40, 100.0);
        if (trial % 3 == 0)
            for (auto& o : offers) o.price = std::floor(o.price / 20.0) * 20.0;
        const auto c = curves::build_curve(offers);
        std::uniform_real_distribution<double> frac(0.0, 1.0);
        double demand = frac(rng) * c.total_quantity();
        if (trial % 5 == 0) demand = c.cumulative()[rng() % c.size()];  // exact edge
        if (demand <= 0.0) demand = c.cumulative().front();
        const auto a = clear(c, demand);
        const auto b = clear_binary_search(c, demand);
        CHECK(a.price == b.price);
        CHECK(a.marginal_block == b.marginal_block);
        CHECK(a.marginal_owner == b.marginal_owner);
        CHECK(a.genco_quantity == b.genco_quantity);
        CHECK(a.price == reference_price(offers, demand));
        CHECK(a.genco_quantity + a.competitor_quantity == doctest::Approx(demand).epsilon(1e-12));
        double dispatched = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            CHECK(a.block_dispatch[k] >= 0.0);
            CHECK(a.block_dispatch[k] <= c.blocks()[k].quantity);
            if (k < a.marginal_block) CHECK(a.block_dispatch[k] == c.blocks()[k].quantity);
            if (k > a.marginal_block) CHECK(a.block_dispatch[k] == 0.0);
            dispatched += a.block_dispatch[k];
        }
        CHECK(dispatched == doctest::Approx(demand).epsilon(1e-12));
    }
}

TEST_CASE("price does not fall as demand grows") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = curves::build_curve(oracle::random_offers(rng, 1 + rng() % 30));
        double prev = -1.0;
        for (int k = 1; k <= 50; ++k) {
            const double d = k == 50 ? c.total_quantity() : c.total_quantity() * k / 50.0;
            const double p = clear(c, d).price;
            CHECK(p >= prev);
            prev = p;
        }
    }
}

TEST_CASE("displacement shifts the cumulative curve left") {
    const auto c = two_steps();
    const auto same = apply_displacement(c, 0.0);
    CHECK(same.cumulative() == c.cumulative());
    CHECK(same.prices() == c.prices());
    const auto d = apply_displacement(c, 3.0);
    CHECK(d.cumulative() == std::vector<double>{2, 12});
    CHECK(d.prices() == c.prices());
    const auto gone = apply_displacement(c, 5.0);
    CHECK(gone.cumulative() == std::vector<double>{10});
    CHECK(gone.prices() == std::vector<double>{40});
    const auto more = apply_displacement(c, -4.0);
    CHECK(more.cumulative() == std::vector<double>{9, 19});
    CHECK_THROWS_AS(apply_displacement(c, 15.0), InvalidArgument);
    CHECK_THROWS_AS(apply_displacement(c, NAN), InvalidArgument);
    CHECK_THROWS_AS(apply_displacement(curves::SteppedSupplyCurve{}, 1.0), InvalidArgument);
}

TEST_CASE("clearing a displaced curve equals clearing with shifted demand") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = curves::build_curve(oracle::random_offers(rng, 2 + rng() % 30));
        const double total = c.total_quantity();
        const double shift = (u(rng) - 0.3) * 0.5 * total;
        const double demand = (0.05 + 0.4 * u(rng)) * total;
        if (demand + shift <= 0.0 || demand + shift > total) continue;
        const auto moved = apply_displacement(c, shift);
        CHECK(clear(moved, demand).price == clear(c, demand + shift).price);
    }
}

TEST_CASE("price does not fall as more supply is withdrawn") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = curves::build_curve(oracle::random_offers(rng, 2 + rng() % 30));
        const double demand = 0.3 * c.total_quantity();
        double prev = -1.0;
        for (int k = 0; k <= 20; ++k) {
            const double shift = -0.2 * demand + k * 0.03 * c.total_quantity();
            const double p = clear(apply_displacement(c, shift), demand).price;
            CHECK(p >= prev);
            prev = p;
        }
    }
}

TEST_CASE("quantity offered at a price is the middle of the flat step") {
    const auto c = two_steps();
    CHECK(quantity_at_price(c, 30.0) == 2.5);
    CHECK(quantity_at_price(c, 35.0) == 5.0);
    CHECK(quantity_at_price(c, 40.0) == 10.0);
    CHECK(quantity_at_price(c, 10.0) == 0.0);
    CHECK(quantity_at_price(c, 99.0) == 15.0);
}

namespace {

std::vector<DisplacementObservation> history(Day first, int days, double (*gap)(int day, int hour)) {
    std::vector<DisplacementObservation> out;
    for (int d = 0; d < days; ++d)
        for (int h = 0; h < 24; ++h) {
            DisplacementObservation o;
            o.hour = HourStamp{first + std::chrono::days{d}} + std::chrono::hours{h};
            o.realized_quantity = 20000.0 + 100.0 * h;
            o.offered_quantity = o.realized_quantity + gap(d, h);
            out.push_back(o);
        }
    return out;
}

}  // namespace

TEST_CASE("identical offered and realized outcomes give no displacement") {
    const Day first = parse_day("2019-01-01");
    const auto h = history(first, 70, [](int, int) { return 0.0; });
    const auto p = estimate_displacement(h, first + std::chrono::days{70}, 60);
    CHECK(p.window_days == 60);
    for (double s : p.shift) CHECK(s == 0.0);
}

TEST_CASE("a constant injected gap of 500 MWh is recovered every hour") {
    const Day first = parse_day("2019-03-01");
    const auto h = history(first, 61, [](int, int) { return 500.0; });
    const auto p = estimate_displacement(h, first + std::chrono::days{61}, 60);
    for (double s : p.shift) CHECK(s == doctest::Approx(500.0));
}

TEST_CASE("only the window strictly before the target day is used") {
    const Day first = parse_day("2019-05-01");
    // day index d carries gap d*10 at every hour
    const auto h = history(first, 40, [](int d, int) { return 10.0 * d; });
    const Day target = first + std::chrono::days{30};
    const auto p = estimate_displacement(h, target, 7);
    // days 23..29 -> mean gap 260
    for (double s : p.shift) CHECK(s == doctest::Approx(260.0));
    // per-hour grouping
    const auto hh = history(first, 10, [](int, int hour) { return hour * 1.0 - 5.0; });
    const auto q = estimate_displacement(hh, first + std::chrono::days{10}, 10);
    for (int k = 0; k < 24; ++k) CHECK(q.shift[k] == doctest::Approx(k - 5.0));
}

TEST_CASE("an hour without observations is an error naming that hour") {
    const Day first = parse_day("2019-01-01");
    auto h = history(first, 5, [](int, int) { return 1.0; });
    std::erase_if(h, [](const DisplacementObservation& o) { return hour_of_day(o.hour) == 7; });
    try {
        (void)estimate_displacement(h, first + std::chrono::days{5}, 5);
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("hour 07") != std::string::npos);
    }
    CHECK_THROWS_AS(estimate_displacement(h, first + std::chrono::days{5}, 0), InvalidArgument);
    // future observations do not fill the gap
    CHECK_THROWS_AS(estimate_displacement(history(first, 5, [](int, int) { return 1.0; }), first, 3),
                    InvalidArgument);
}
