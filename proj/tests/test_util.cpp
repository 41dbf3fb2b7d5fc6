#include <doctest.h>

#include <atomic>
#include <numeric>

#include "forge/rng.hpp"
#include "forge/sha256.hpp"
#include "forge/util.hpp"

using namespace forge;

TEST_CASE("sha256 matches FIPS vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // streaming in odd chunk sizes must match one-shot
    std::string msg(1000, 'a');
    Sha256 s;
    s.update(msg.substr(0, 3));
    s.update(msg.substr(3, 61));
    s.update(msg.substr(64));
    CHECK(s.hex_digest() == sha256_hex(msg));
}

TEST_CASE("rng streams are deterministic and named") {
    Rng a = derive_rng(42, "stream-a");
    Rng a2 = derive_rng(42, "stream-a");
    Rng b = derive_rng(42, "stream-b");
    std::uint64_t v1 = a.next_u64();
    CHECK(v1 == a2.next_u64());
    CHECK(v1 != b.next_u64());
    CHECK(derive_rng(42, "s", 0).next_u64() != derive_rng(42, "s", 1).next_u64());
}

TEST_CASE("rng uniform and below stay in range") {
    Rng r(123);
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
    }
}

TEST_CASE("parallel_for is worker-count independent") {
    std::vector<int> out1(1000), out4(1000);
    auto fill = [](std::vector<int>& v) {
        return [&v](std::size_t i) { v[i] = static_cast<int>(i * i % 97); };
    };
    parallel_for(1000, 1, fill(out1));
    parallel_for(1000, 4, fill(out4));
    CHECK(out1 == out4);
}

TEST_CASE("parallel_for propagates exceptions") {
    CHECK_THROWS(parallel_for(16, 4, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }));
}
