#include "doctest.h"
#include "sorso/errors.hpp"
#include "sorso/kv.hpp"

using namespace sorso;

TEST_CASE("kv parses keys, values, comments, blank lines") {
    auto es = parse_kv_text("# header\n\nfoo = 1.5\nbar_2 = a, b # trailing\n", "t");
    REQUIRE(es.size() == 2);
    CHECK(es[0].key == "foo");
    CHECK(es[0].value == "1.5");
    CHECK(es[0].line == 3);
    CHECK(es[1].key == "bar_2");
    CHECK(es[1].value == "a, b");
    CHECK(es[1].line == 4);
}

TEST_CASE("kv rejects duplicates and malformed lines with line numbers") {
    CHECK_THROWS_AS(parse_kv_text("a = 1\na = 2\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_kv_text("no equals sign\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_kv_text("BadKey = 1\n", "t"), ConfigError);
    try {
        parse_kv_text("ok = 1\nbroken\n", "t");
        FAIL("expected throw");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("kv typed accessors") {
    auto es = parse_kv_text("r = 0.25\ni = -3\nb = on\nl = 1, 2.5, -4\nu = 7, 9\n", "t");
    CHECK(kv_to_real(es[0]) == 0.25);
    CHECK(kv_to_int(es[1]) == -3);
    CHECK(kv_to_on_off(es[2]) == true);
    auto rl = kv_to_real_list(es[3]);
    REQUIRE(rl.size() == 3);
    CHECK(rl[1] == 2.5);
    auto ul = kv_to_u64_list(es[4]);
    REQUIRE(ul.size() == 2);
    CHECK(ul[1] == 9);
    CHECK_THROWS_AS(kv_to_real(es[2]), ConfigError);
    CHECK_THROWS_AS(kv_to_on_off(es[0]), ConfigError);
}

TEST_CASE("format_real round-trips doubles through text") {
    for (double v : {0.1, 1.0 / 3.0, 2e-5, 123456.789012345678, 2.2250738585072014e-308}) {
        CHECK(std::stod(format_real(v)) == v);
    }
}
