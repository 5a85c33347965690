#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "genco/curves.hpp"
#include "support/curve_oracle.hpp"

using namespace genco::curves;

namespace {

OfferBlock block(double price, double qty, Owner owner = Owner::competitor, std::string id = {}) {
    OfferBlock b;
    b.price = price;
    b.quantity = qty;
    b.owner = owner;
    b.unit_id = std::move(id);
    return b;
}

SteppedSupplyCurve random_curve(std::mt19937_64& rng, std::size_t n) {
    return build_curve(oracle::random_offers(rng, n));
}

void check_result_shape(const SteppedSupplyCurve& c, const DiscretizationResult& r, std::size_t groups) {
    REQUIRE(r.groups() == groups);
    REQUIRE(r.group_end.size() == groups);
    CHECK(r.group_end.back() == c.size());
    double total = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
        CHECK(r.group_begin(g) < r.group_end[g]);
        if (g > 0) CHECK(r.prices[g] >= r.prices[g - 1]);
        total += r.quantities[g];
    }
    CHECK(total == doctest::Approx(c.total_quantity()).epsilon(1e-12));
}

}  // namespace

TEST_CASE("two blocks are sorted by price") {
    const auto c = build_curve({block(10, 5), block(5, 3)});
    CHECK(c.prices() == std::vector<double>{5, 10});
    CHECK(c.cumulative() == std::vector<double>{3, 8});
    CHECK(c.total_quantity() == 8);
}

TEST_CASE("single block curve") {
    const auto c = build_curve({block(42, 100)});
    CHECK(c.cumulative() == std::vector<double>{100});
    CHECK(c.size() == 1);
}

TEST_CASE("cumulative quantities are prefix sums of the price-sorted offers") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto offers = oracle::random_offers(rng, 20);
        std::vector<std::pair<double, double>> pq;
        for (const auto& o : offers) pq.emplace_back(o.price, o.quantity);
        std::sort(pq.begin(), pq.end());
        const auto c = build_curve(offers);
        double run = 0.0;
        for (std::size_t k = 0; k < pq.size(); ++k) {
            run += c.blocks()[k].quantity;
            CHECK(c.blocks()[k].price == pq[k].first);
            CHECK(c.cumulative()[k] == doctest::Approx(run));
        }
        double expected = 0.0;
        for (const auto& [p, q] : pq) expected += q;
        CHECK(c.total_quantity() == doctest::Approx(expected));
    }
}

TEST_CASE("equal prices keep producer blocks first, then input order") {
    const auto c = build_curve({block(20, 1, Owner::competitor, "c1"), block(20, 2, Owner::genco, "g1"),
                                block(10, 3, Owner::competitor, "c0"), block(20, 4, Owner::competitor, "c2"),
                                block(20, 5, Owner::genco, "g2")});
    std::vector<std::string> ids;
    for (const auto& b : c.blocks()) ids.push_back(b.unit_id);
    CHECK(ids == std::vector<std::string>{"c0", "g1", "g2", "c1", "c2"});
}

TEST_CASE("invalid offers are rejected") {
    CHECK_THROWS_AS(build_curve({}), genco::InvalidArgument);
    CHECK_THROWS_AS(build_curve({block(10, -1)}), genco::InvalidArgument);
    CHECK_THROWS_AS(build_curve({block(10, 0)}), genco::InvalidArgument);
    CHECK_THROWS_AS(build_curve({block(-1, 5)}), genco::InvalidArgument);
    CHECK_THROWS_AS(build_curve({block(NAN, 5)}), genco::InvalidArgument);
    CHECK_THROWS_AS(build_curve({block(10, INFINITY)}), genco::InvalidArgument);
    CHECK_THROWS_AS(SteppedSupplyCurve::from_sorted({block(10, 1), block(5, 1)}), genco::InvalidArgument);
    CHECK(SteppedSupplyCurve::from_sorted({}).empty());
}

TEST_CASE("owner names round trip") {
    CHECK(parse_owner(to_string(Owner::genco)) == Owner::genco);
    CHECK(parse_owner(to_string(Owner::competitor)) == Owner::competitor);
    CHECK_THROWS_AS(parse_owner("GENCO"), genco::InvalidArgument);
}

TEST_CASE("aggregate merges curves in price order") {
    const auto g = build_curve({block(40, 10, Owner::genco)});
    const auto k = build_curve({block(30, 5)});
    const std::vector<SteppedSupplyCurve> both{g, k};
    const auto a = aggregate(both);
    CHECK(a.prices() == std::vector<double>{30, 40});
    CHECK(a.cumulative() == std::vector<double>{5, 15});
    CHECK(a.blocks()[1].owner == Owner::genco);

    const std::vector<SteppedSupplyCurve> one{k};
    const auto same = aggregate(one);
    CHECK(same.prices() == k.prices());
    CHECK(same.cumulative() == k.cumulative());
    CHECK_THROWS_AS(aggregate(std::vector<SteppedSupplyCurve>{}), genco::InvalidArgument);
}

TEST_CASE("aggregate equals building from the concatenated offers") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        auto oa = oracle::random_offers(rng, 1 + rng() % 15);
        auto ob = oracle::random_offers(rng, 1 + rng() % 15);
        // coarse prices force ties between the two curves
        for (auto& o : oa) o.price = std::floor(o.price / 30.0) * 30.0;
        for (auto& o : ob) o.price = std::floor(o.price / 30.0) * 30.0;
        const std::vector<SteppedSupplyCurve> parts{build_curve(oa), build_curve(ob)};
        const std::vector<SteppedSupplyCurve> swapped{parts[1], parts[0]};
        auto all = oa;
        all.insert(all.end(), ob.begin(), ob.end());
        const auto direct = build_curve(all);
        const auto merged = aggregate(parts);
        CHECK(merged.prices() == direct.prices());
        CHECK(merged.total_quantity() == doctest::Approx(direct.total_quantity()));

        // cumulative supply as a function of price does not depend on order
        const auto other = aggregate(swapped);
        for (double price = 0.0; price <= 180.0; price += 7.5) {
            double s1 = 0.0, s2 = 0.0;
            for (const auto& b : merged.blocks())
                if (b.price <= price) s1 += b.quantity;
            for (const auto& b : other.blocks())
                if (b.price <= price) s2 += b.quantity;
            CHECK(s1 == doctest::Approx(s2));
        }
    }
}

TEST_CASE("weighted median picks the lower median on ties") {
    const std::vector<double> p{1, 2};
    const std::vector<double> w{1, 1};
    CHECK(weighted_median(p, w) == 1);
    const std::vector<double> p3{1, 1, 9};
    const std::vector<double> w3{1, 1, 1};
    CHECK(weighted_median(p3, w3) == 1);
    const std::vector<double> heavy{1, 5, 9};
    const std::vector<double> wh{1, 1, 10};
    CHECK(weighted_median(heavy, wh) == 9);
    CHECK_THROWS_AS(weighted_median(std::vector<double>{}, std::vector<double>{}), genco::InvalidArgument);
    CHECK_THROWS_AS(weighted_median(p, w3), genco::InvalidArgument);
}

TEST_CASE("one group of [1,1,9] is priced at 1 with cost 8") {
    const auto c = build_curve({block(1, 1), block(1, 1), block(9, 1)});
    for (const auto& r : {discretize(c, 1), discretize_dp_oracle(c, 1)}) {
        CHECK(r.prices == std::vector<double>{1});
        CHECK(r.error == doctest::Approx(8));
    }
}

TEST_CASE("as many groups as blocks reproduces the curve exactly") {
    std::mt19937_64 rng(5);
    for (std::size_t n : {1u, 2u, 5u, 12u, 30u}) {
        const auto c = random_curve(rng, n);
        for (const auto& r : {discretize(c, n), discretize_dp_oracle(c, n)}) {
            CHECK(r.error == 0.0);
            check_result_shape(c, r, n);
            for (std::size_t g = 0; g < n; ++g) {
                CHECK(r.group_end[g] == g + 1);
                CHECK(r.prices[g] == c.blocks()[g].price);
            }
        }
    }
}

TEST_CASE("a single group is priced at the weighted median") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = random_curve(rng, 1 + rng() % 25);
        const auto r = discretize(c, 1);
        const auto p = c.prices();
        const auto q = c.quantities();
        CHECK(r.prices.front() == weighted_median(p, q));
        CHECK(r.error == doctest::Approx(oracle::segment_cost(p, q, 0, p.size())).epsilon(1e-12));
    }
}

TEST_CASE("dynamic programme matches exhaustive search") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        const std::size_t g = 1 + rng() % std::min<std::size_t>(n, 7);
        const auto c = random_curve(rng, n);
        const auto r = discretize_dp_oracle(c, g);
        check_result_shape(c, r, g);
        CHECK(r.error == doctest::Approx(oracle::best_partition_cost(c, g)).epsilon(1e-12));
    }
}

TEST_CASE("mixed-integer model matches the dynamic programme") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 18;
        const std::size_t g = 1 + rng() % std::min<std::size_t>(n, 7);
        const auto c = random_curve(rng, n);
        const auto mip = discretize(c, g);
        const auto dp = discretize_dp_oracle(c, g);
        check_result_shape(c, mip, g);
        CHECK(mip.proven_optimal);
        CHECK(std::abs(mip.error - dp.error) <= 1e-6);
    }
}

TEST_CASE("thirty blocks in seven groups agree with the dynamic programme") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 2; ++trial) {
        const auto c = random_curve(rng, 30);
        const auto mip = discretize(c, 7);
        const auto dp = discretize_dp_oracle(c, 7);
        check_result_shape(c, mip, 7);
        CHECK(std::abs(mip.error - dp.error) <= 1e-6);
    }
}

TEST_CASE("optimal error beats every sampled partition") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 29;
        const std::size_t g = 1 + rng() % std::min<std::size_t>(n, 7);
        const auto c = random_curve(rng, n);
        const double best = discretize_dp_oracle(c, g).error;
        for (int s = 0; s < 20; ++s) {
            const auto r = evaluate_partition(c, oracle::random_partition(rng, n, g));
            CHECK(best <= r.error + 1e-9);
        }
    }
}

TEST_CASE("error does not grow with more groups") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng() % 30;
        const auto c = random_curve(rng, n);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t g = 1; g <= n; ++g) {
            const double e = discretize_dp_oracle(c, g).error;
            CHECK(e <= prev + 1e-9);
            prev = e;
        }
        CHECK(prev == 0.0);
    }
}

TEST_CASE("evaluate_partition prices groups at weighted medians") {
    const auto c = build_curve({block(1, 1), block(2, 3), block(10, 1), block(20, 1), block(30, 5)});
    const auto r = evaluate_partition(c, {2, 5});
    CHECK(r.prices == std::vector<double>{2, 30});
    CHECK(r.quantities == std::vector<double>{4, 7});
    CHECK(r.error == doctest::Approx(1 + 20 + 10));
    CHECK_THROWS_AS(evaluate_partition(c, {}), genco::InvalidArgument);
    CHECK_THROWS_AS(evaluate_partition(c, {2, 4}), genco::InvalidArgument);
    CHECK_THROWS_AS(evaluate_partition(c, {3, 3, 5}), genco::InvalidArgument);
}

TEST_CASE("group counts outside 1..B are rejected") {
    const auto c = build_curve({block(1, 1), block(2, 1)});
    CHECK_THROWS_AS(discretize(c, 0), genco::InvalidArgument);
    CHECK_THROWS_AS(discretize(c, 3), genco::InvalidArgument);
    CHECK_THROWS_AS(discretize_dp_oracle(c, 3), genco::InvalidArgument);
    CHECK_THROWS_AS(discretize(SteppedSupplyCurve{}, 1), genco::InvalidArgument);
    CHECK_THROWS_AS(build_discretization_model(c, 3), genco::InvalidArgument);
}

TEST_CASE("discretization model has one cut row and a binary per block") {
    std::mt19937_64 rng(13);
    const auto c = random_curve(rng, 9);
    const auto m = build_discretization_model(c, 4);
    std::size_t binaries = 0;
    for (const auto& v : m.variables()) binaries += v.kind == genco::milp::VarKind::binary;
    CHECK(binaries == 9);
    const auto sol = genco::milp::solve(m);
    CHECK(sol.status == genco::milp::Status::optimal);
    CHECK(sol.objective == doctest::Approx(discretize_dp_oracle(c, 4).error).epsilon(1e-9));
}
