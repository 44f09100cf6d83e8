#include "adarep/gas_model.hpp"

#include <algorithm>

#include "adarep/error.hpp"

namespace adarep {

void GasSchedule::validate() const {
    if (tx_base == 0 || tx_per_word == 0 || insert_per_word == 0 || update_per_word == 0 ||
        read_per_word == 0 || hash_base == 0 || hash_per_word == 0) {
        throw ValidationError("gas schedule: all prices must be positive");
    }
    if (!(insert_per_word > update_per_word && update_per_word > tx_per_word &&
          tx_per_word > read_per_word)) {
        throw ValidationError(
            "gas schedule: expected insert_per_word > update_per_word > tx_per_word > "
            "read_per_word");
    }
}

GasSchedule make_schedule(const GasSchedule& s) {
    s.validate();
    return s;
}

std::uint32_t default_k(const GasSchedule& s) {
    const Gas unit = s.off_chain_read_unit_cost();
    if (unit == 0) throw ValidationError("off-chain read unit cost must be positive");
    return static_cast<std::uint32_t>(std::max<Gas>(1, s.update_per_word / unit));
}

std::uint32_t default_k_prime(const GasSchedule& s) { return default_k(s); }

}  // namespace adarep
