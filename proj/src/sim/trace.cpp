#include "qkdmg/sim/trace.hpp"

namespace qkdmg::sim {

std::vector<ExhaustionInterval> Trace::exhaustions_of(int channel_id) const {
    std::vector<ExhaustionInterval> out;
    for (const auto& e : exhaustions) {
        if (e.channel_id == channel_id) {
            out.push_back(e);
        }
    }
    return out;
}

double Trace::total_exhausted_time(int channel_id) const {
    double total = 0.0;
    for (const auto& e : exhaustions) {
        if (e.channel_id == channel_id) {
            total += e.end - e.start;
        }
    }
    return total;
}

bool Trace::ever_compromised(int channel_id) const {
    for (const auto& c : compromised) {
        if (c.channel_id == channel_id) {
            return true;
        }
    }
    return false;
}

}  // namespace qkdmg::sim
