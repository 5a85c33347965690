#include <ostream>

#include <fmt/format.h>

#include "core/csv.hpp"
#include "genco/offering.hpp"

namespace genco::offering {

void write_offers_csv(std::ostream& out, const OfferingSolution& s) {
    out << "hour,block,price\n";
    for (int t = 0; t < s.hours; ++t)
        for (int i = 0; i < s.blocks; ++i) out << t << ',' << i + 1 << ',' << csv::num(s.offer(t, i)) << '\n';
}

void write_profits_csv(std::ostream& out, const OfferingSolution& s, const OfferingProblem& p) {
    out << "scenario,probability,profit\n";
    for (int w = 0; w < s.scenarios; ++w)
        out << w + 1 << ',' << csv::num(p.scenarios.probability[static_cast<std::size_t>(w)]) << ','
            << csv::num(s.profit[static_cast<std::size_t>(w)]) << '\n';
}

void write_summary_csv(std::ostream& out, const OfferingSolution& s, const OfferingProblem& p) {
    const auto& pi = p.scenarios.probability;
    double price = 0.0;
    double energy = 0.0;
    for (int t = 0; t < s.hours; ++t)
        for (int w = 0; w < s.scenarios; ++w) {
            const double q = pi[static_cast<std::size_t>(w)];
            price += q * s.price(t, w);
            energy += q * p.forecast.renewable[static_cast<std::size_t>(t)];
            for (int i = 0; i < s.blocks; ++i)
                energy += q * s.Q[(static_cast<std::size_t>(t) * s.scenarios + w) * s.blocks + i];
        }
    price /= s.hours;
    energy /= s.hours;
    out << "chi,alpha,expected_profit,cvar,objective,status,gap,mean_price,mean_energy";
    for (int i = 0; i < s.blocks; ++i) out << ",mean_price_block_" << i + 1;
    out << '\n';
    out << csv::num(p.chi) << ',' << csv::num(p.alpha) << ',' << csv::num(s.expected_profit) << ','
        << csv::num(s.cvar) << ',' << csv::num(s.objective) << ',' << milp::to_string(s.status) << ','
        << csv::num(s.gap) << ',' << csv::num(price) << ',' << csv::num(energy);
    for (int i = 0; i < s.blocks; ++i) {
        double m = 0.0;
        for (int t = 0; t < s.hours; ++t) m += s.offer(t, i);
        out << ',' << csv::num(m / s.hours);
    }
    out << '\n';
}

}  // namespace genco::offering
