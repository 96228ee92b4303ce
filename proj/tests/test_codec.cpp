#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kbits/codec.hpp"
#include "kbits/noise.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

using namespace kbits;

namespace {
const MaryConfig k1024 = MaryConfig::make(1024, 10.0);
const MaryConfig k256 = MaryConfig::make(256, 10.0);
}  // namespace

TEST_CASE("configuration geometry") {
    CHECK(k1024.bits_per_basis() == 10);
    CHECK(k1024.v_max() == doctest::Approx(20.0));
    CHECK(k1024.adc_lsb() == doctest::Approx(0.01953125).epsilon(1e-15));
    CHECK(k1024.dac_step() == doctest::Approx(0.009765625).epsilon(1e-15));
    CHECK(k1024.bit_level(0) == 0.0);
    CHECK(k1024.bit_level(1) == 10.0);
    CHECK(MaryConfig::make(4, 1.0).bits_per_basis() == 2);

    CHECK_THROWS_AS(MaryConfig::make(3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MaryConfig::make(2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MaryConfig::make(100, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MaryConfig::make(1024, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(MaryConfig::make(1024, -2.0), std::invalid_argument);
}

TEST_CASE("basis index uses the first bit as least significant") {
    CHECK(basis_index(BitVec{1, 0, 1}) == 5);
    CHECK(basis_index(BitVec{0, 1}) == 2);
    CHECK(basis_index(BitVec{1}) == 1);
    CHECK(basis_index(BitVec(10, 1)) == 1023);
    CHECK_THROWS_AS(basis_index(BitVec{}), std::invalid_argument);
    CHECK_THROWS_AS(basis_index(BitVec(32, 0)), std::invalid_argument);
}

TEST_CASE("basis voltage alternates sign by parity") {
    CHECK(basis_voltage(0, k1024) == doctest::Approx(0.0));
    CHECK(basis_voltage(2, k1024) == doctest::Approx(10.0 * 2 / 1024).epsilon(1e-15));
    CHECK(basis_voltage(1, k1024) == doctest::Approx(10.0 * (1.0 / 1024 - 1.0)).epsilon(1e-15));
    CHECK(basis_voltage(1023, k1024) ==
          doctest::Approx(10.0 * (1023.0 / 1024 - 1.0)).epsilon(1e-12));
    CHECK(basis_voltage(1022, k1024) == doctest::Approx(10.0 * 1022 / 1024).epsilon(1e-15));
    // even indices sweep [0, b_max), odd indices sweep [-b_max, 0)
    for (BasisIndex k = 0; k < 1024; ++k) {
        const double b = basis_voltage(k, k1024);
        if (k % 2 == 0) {
            CHECK(b >= 0.0);
            CHECK(b < 10.0);
        } else {
            CHECK(b >= -10.0);
            CHECK(b < 0.0);
        }
    }
    CHECK_THROWS_AS(basis_voltage(1024, k1024), std::invalid_argument);
}

TEST_CASE("wrap folds into [0, v_max)") {
    CHECK(wrap(0.0, k1024) == 0.0);
    CHECK(wrap(20.0, k1024) == 0.0);
    CHECK(wrap(-0.5, k1024) == doctest::Approx(19.5).epsilon(1e-15));
    CHECK(wrap(41.25, k1024) == doctest::Approx(1.25).epsilon(1e-15));
    for (double v : {-100.0, -19.99, -1e-9, 0.0, 3.7, 19.99, 20.0, 55.5}) {
        const double w = wrap(v, k1024);
        CHECK(w >= 0.0);
        CHECK(w < 20.0);
    }
}

TEST_CASE("quantize / dequantize") {
    CHECK(quantize(0.0, k1024) == 0);
    CHECK(quantize(0.01953124, k1024) == 0);
    CHECK(quantize(0.01953125, k1024) == 1);
    CHECK(quantize(19.9999999, k1024) == 1023);
    CHECK(quantize(25.0, k1024) == 1023);   // defensive clamp
    CHECK(quantize(-1.0, k1024) == 0);      // defensive clamp
    CHECK(dequantize(0, k1024) == doctest::Approx(0.5 * 0.01953125).epsilon(1e-15));
    CHECK(dequantize(1023, k1024) == doctest::Approx(1023.5 * 0.01953125).epsilon(1e-15));
    CHECK_THROWS_AS(dequantize(1024, k1024), std::invalid_argument);
    CHECK_THROWS_AS(quantize(std::nan(""), k1024), std::invalid_argument);
}

TEST_CASE("wire codes sit on the fine grid and map onto adc codes") {
    // Noiseless samples land exactly on grid points; the wire code equals the
    // grid index and the adc code is its upper half.
    for (BasisIndex k = 0; k < 256; ++k) {
        for (int bit = 0; bit < 2; ++bit) {
            const WireCode w = encode_wire_sample(bit, k, 0.0, k256);
            CHECK(w < 512);
            const double v = wrap(k256.bit_level(bit) + basis_voltage(k, k256), k256);
            CHECK(wire_voltage(w, k256) == doctest::Approx(v).epsilon(1e-12));
            CHECK(wire_to_adc(w) == encode_sample(bit, k, 0.0, k256));
            CHECK(wire_to_adc(w) == quantize(v, k256));
        }
    }
    MaryConfig big = MaryConfig::make(65536, 10.0);
    CHECK_THROWS_AS(encode_wire_sample(0, 0, 0.0, big), std::invalid_argument);
}

TEST_CASE("noiseless grid index identity") {
    // bit 0 occupies even grid slots below M and odd slots above, bit 1 the
    // complement; this parity structure is what the wire codes preserve and
    // the coarse adc destroys.
    const std::uint32_t m = 256;
    for (BasisIndex k = 0; k < m; ++k) {
        const WireCode w0 = encode_wire_sample(0, k, 0.0, k256);
        const WireCode w1 = encode_wire_sample(1, k, 0.0, k256);
        if (k % 2 == 0) {
            CHECK(w0 == k);
            CHECK(w1 == k + m);
        } else {
            CHECK(w0 == k + m);
            CHECK(w1 == k);
        }
    }
}

TEST_CASE("all 2M wrapped levels are distinct and evenly filled") {
    std::set<WireCode> seen;
    for (BasisIndex k = 0; k < 256; ++k)
        for (int bit = 0; bit < 2; ++bit) seen.insert(encode_wire_sample(bit, k, 0.0, k256));
    CHECK(seen.size() == 512);
}

TEST_CASE("constellation spacing: consecutive bases land far apart") {
    // After wrapping, bit-0 levels of consecutive basis indices are separated
    // by b_max*(M-1)/M on the circle: neighbouring indices are NOT
    // neighbouring voltages.
    const double expect = 10.0 * 1023.0 / 1024.0;
    for (BasisIndex k = 0; k + 1 < 1024; ++k) {
        const double a = wrap(basis_voltage(k, k1024), k1024);
        const double b = wrap(basis_voltage(k + 1, k1024), k1024);
        CHECK(cyclic_distance(a, b, k1024) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("constellation spacing: sorted bit-0 levels are v_max/M apart") {
    // All M wrapped bit-0 levels sorted: uniform pitch v_max/M except the two
    // seam gaps u and 3u where the even and odd families meet.
    std::vector<double> levels;
    for (BasisIndex k = 0; k < 1024; ++k)
        levels.push_back(wrap(basis_voltage(k, k1024), k1024));
    std::sort(levels.begin(), levels.end());
    const double u = k1024.dac_step();
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) gaps.push_back(levels[i + 1] - levels[i]);
    gaps.push_back(20.0 - levels.back() + levels.front());  // wraparound gap
    std::sort(gaps.begin(), gaps.end());
    CHECK(gaps.front() == doctest::Approx(u).epsilon(1e-9));          // seam
    CHECK(gaps.back() == doctest::Approx(3.0 * u).epsilon(1e-9));     // seam
    for (std::size_t i = 1; i + 1 < gaps.size(); ++i)
        CHECK(gaps[i] == doctest::Approx(2.0 * u).epsilon(1e-9));     // = v_max/M
}

TEST_CASE("legitimate decode recovers every noiseless sample") {
    for (BasisIndex k = 0; k < 1024; ++k) {
        for (int bit = 0; bit < 2; ++bit) {
            const AdcCode code = encode_sample(bit, k, 0.0, k1024);
            CHECK(decode_sample(code, k, k1024) == bit);
        }
    }
}

TEST_CASE("legitimate decode survives sub-threshold noise") {
    // Additive noise below v_max/4 keeps the sample nearer its own bit level
    // than the opposite one.
    const double quarter = k1024.v_max() / 4.0;
    for (BasisIndex k : {0u, 1u, 7u, 500u, 511u, 512u, 513u, 1022u, 1023u}) {
        for (int bit = 0; bit < 2; ++bit) {
            for (double noise : {0.3, 1.0, quarter - 0.011, -0.9, -quarter + 0.011}) {
                const AdcCode code = encode_sample(bit, k, noise, k1024);
                CHECK(decode_sample(code, k, k1024) == bit);
            }
        }
    }
}

TEST_CASE("cyclic distance") {
    CHECK(cyclic_distance(0.0, 19.5, k1024) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cyclic_distance(19.5, 0.0, k1024) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cyclic_distance(3.0, 3.0, k1024) == 0.0);
    CHECK(cyclic_distance(0.0, 10.0, k1024) == doctest::Approx(10.0));
    CHECK(cyclic_distance(2.0, 13.0, k1024) == doctest::Approx(9.0));
}

TEST_CASE("grid noise sources stay on the dac grid") {
    GridGaussianNoise g(0.0196771, k1024, 11);
    const double u = k1024.dac_step();
    for (int i = 0; i < 1000; ++i) {
        const double n = g.next();
        CHECK(n >= 0.0);
        CHECK(n < 10.0);
        const double steps = n / u;
        CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-12));
    }
    UniformGridNoise uni(k1024, 12);
    for (int i = 0; i < 1000; ++i) {
        const double n = uni.next();
        CHECK(n >= 0.0);
        CHECK(n < 20.0);
        const double steps = n / u;
        CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-12));
    }
}

TEST_CASE("zero noise source") {
    ZeroNoise z;
    CHECK(z.next() == 0.0);
}
