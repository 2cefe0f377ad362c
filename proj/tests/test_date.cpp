#include "core/date.hpp"
#include "core/errors.hpp"

#include <doctest.h>

using finvision::Date;

TEST_SUITE_BEGIN("date");

TEST_CASE("parses and prints ISO dates") {
    Date d = Date::parse("2023-06-01");
    CHECK(d.year() == 2023);
    CHECK(d.month() == 6);
    CHECK(d.day() == 1);
    CHECK(d.to_string() == "2023-06-01");
}

TEST_CASE("rejects malformed dates") {
    Date out;
    CHECK_FALSE(Date::try_parse("2023-13-01", out));
    CHECK_FALSE(Date::try_parse("2023-02-30", out));
    CHECK_FALSE(Date::try_parse("2023/06/01", out));
    CHECK_FALSE(Date::try_parse("23-06-01", out));
    CHECK_THROWS_AS(Date::parse("not a date"), finvision::Error);
}

TEST_CASE("handles leap years") {
    Date out;
    CHECK(Date::try_parse("2024-02-29", out));
    CHECK_FALSE(Date::try_parse("2023-02-29", out));
}

TEST_CASE("ordering and arithmetic") {
    Date a = Date::parse("2023-06-01");
    Date b = Date::parse("2023-06-02");
    CHECK(a < b);
    CHECK(a.add_days(1) == b);
    CHECK(b.add_days(-1) == a);
    CHECK(a.add_days(365).to_string() == "2024-05-31");
}

TEST_CASE("weekdays") {
    CHECK(Date::parse("2023-06-01").weekday() == 4);  // Thursday
    CHECK(Date::parse("2023-06-04").weekday() == 0);  // Sunday
    CHECK(Date::parse("2023-06-05").weekday() == 1);  // Monday
}

TEST_CASE("round trips through the serial representation") {
    for (const char* s : {"1970-01-01", "1999-12-31", "2023-06-01", "2100-03-15"}) {
        Date d = Date::parse(s);
        CHECK(Date::from_serial(d.serial()) == d);
        CHECK(Date::from_serial(d.serial()).to_string() == s);
    }
}

TEST_SUITE_END();
