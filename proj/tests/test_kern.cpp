#include "nct/kern.hpp"

#include "nct/error.hpp"
#include "test_util.hpp"

#include "doctest.h"

using namespace nct;

TEST_CASE("recip durations") {
    CHECK(parse_recip("4") == Rational(1));
    CHECK(parse_recip("2") == Rational(2));
    CHECK(parse_recip("8.") == Rational(3, 4));
    CHECK(parse_recip("16") == Rational(1, 4));
    CHECK(parse_recip("12") == Rational(1, 3));
    CHECK(parse_recip("4..") == Rational(7, 4));
    CHECK(parse_recip("0") == Rational(8));
    CHECK(parse_recip("00") == Rational(16));
    CHECK_THROWS_AS(parse_recip(""), Error);
    CHECK_THROWS_AS(parse_recip("x"), Error);
}

TEST_CASE("kern note tokens") {
    KernNote n = parse_kern_note("4c");
    CHECK(n.midi_pitch == 60);
    CHECK(n.duration_q == Rational(1));
    CHECK_FALSE(n.is_rest);

    n = parse_kern_note("8.ee-");
    CHECK(n.midi_pitch == 75);
    CHECK(n.duration_q == Rational(3, 4));

    n = parse_kern_note("2r");
    CHECK(n.is_rest);
    CHECK(n.duration_q == Rational(2));

    n = parse_kern_note("[4g");
    CHECK(n.tie_open);
    CHECK(n.midi_pitch == 67);

    n = parse_kern_note("4g]");
    CHECK(n.tie_close);

    n = parse_kern_note("ccq");
    CHECK(n.is_grace);
    CHECK(n.midi_pitch == 72);
    CHECK(n.duration_q == Rational(0));

    n = parse_kern_note("8fq");
    CHECK(n.is_grace);
    CHECK(n.midi_pitch == 65);

    CHECK(parse_kern_note("4cc#").midi_pitch == 73);
    CHECK(parse_kern_note("4CC").midi_pitch == 36);
    CHECK(parse_kern_note("4B-").midi_pitch == 58);

    CHECK_THROWS_AS(parse_kern_note("4"), Error);
    CHECK_THROWS_AS(parse_kern_note("c"), Error); // no duration, not grace
}

TEST_CASE("parse mini corpus document") {
    auto doc = parse_kern(read_file(mini_corpus_path("cmaj_passing.krn")), "cmaj_passing");
    CHECK(doc.spine_count() == 2);
    CHECK(doc.spines[0].is_harm());
    CHECK(doc.spines[1].is_kern());
    REQUIRE(doc.meter_map.size() == 1);
    CHECK(doc.meter_map[0].second.numerator == 4);
    CHECK(doc.meter_map[0].second.beat_q() == Rational(1));
    REQUIRE(doc.key_map.size() == 1);
    CHECK(doc.key_map[0].second.tonic_pc == 0);
    CHECK(doc.key_map[0].second.mode == Mode::major);
    CHECK(doc.warnings.empty());
}

TEST_CASE("round trip serialization is byte identical") {
    for (const char* name : {"cmaj_passing.krn", "aminor_neighbor.krn", "gmaj_applied.krn"}) {
        std::string text = read_file(mini_corpus_path(name));
        auto doc = parse_kern(text, name);
        CHECK(serialize(doc) == text);
    }
}

TEST_CASE("melody selection merges ties and drops graces") {
    auto doc = parse_kern(read_file(mini_corpus_path("cmaj_passing.krn")), "cmaj_passing");
    auto melody = select_melody(doc);
    REQUIRE(melody.size() == 10);
    const auto& tied = melody[5];
    CHECK(tied.midi_pitch == 67);
    CHECK(tied.tie_merged);
    CHECK(tied.duration_q == Rational(3));
    CHECK(tied.onset_q == Rational(5));
    CHECK(tied.record_indices.size() == 2);

    // onsets strictly increasing
    for (std::size_t i = 1; i < melody.size(); ++i)
        CHECK(melody[i].onset_q > melody[i - 1].onset_q);

    // tie merging conserves total duration: 4+4+4 quarters of notes
    Rational total(0);
    for (const auto& ev : melody) total += ev.duration_q;
    CHECK(total == Rational(12));

    auto gdoc = parse_kern(read_file(mini_corpus_path("gmaj_applied.krn")), "gmaj_applied");
    auto gmel = select_melody(gdoc);
    REQUIRE(gmel.size() == 9); // 8 notes + 1 rest
    CHECK(gmel[4].is_rest);
    CHECK(gmel[4].duration_q == Rational(1, 2));
}

TEST_CASE("chord tokens reduce to the highest pitch, graces are skipped") {
    auto doc = parse_kern(read_file(mini_corpus_path("aminor_neighbor.krn")), "aminor_neighbor");
    auto melody = select_melody(doc);
    REQUIRE(melody.size() == 9); // no rests, grace dropped
    CHECK(melody[5].midi_pitch == 76); // top of 4cc 4ee
    CHECK(melody[5].duration_q == Rational(1));
    CHECK(melody[6].midi_pitch == 71); // grace between events 5 and 6 ignored
}

TEST_CASE("anacrusis positions count back from the following barline") {
    auto doc = parse_kern(read_file(mini_corpus_path("aminor_neighbor.krn")), "aminor_neighbor");
    auto melody = select_melody(doc);
    CHECK(melody[0].bar_index == 0);
    CHECK(melody[0].onset_in_bar_q == Rational(2)); // beat 3 of a 3/4 bar
    CHECK(melody[1].bar_index == 1);
    CHECK(melody[1].onset_in_bar_q == Rational(0));
    CHECK(doc.warnings.empty()); // pickup bar exempt from conservation check
}

TEST_CASE("default melody policy picks the right-most kern spine") {
    std::string text =
        "**kern\t**kern\n"
        "*M4/4\t*M4/4\n"
        "*C:\t*C:\n"
        "4C\t4c\n"
        "4D\t4d\n"
        "=1\t=1\n"
        "*-\t*-\n";
    auto doc = parse_kern(text, "two_kern");
    auto melody = select_melody(doc);
    REQUIRE(melody.size() == 2);
    CHECK(melody[0].midi_pitch == 60);
    auto left = select_melody(doc, MelodyPolicy{0});
    CHECK(left[0].midi_pitch == 48);
    CHECK_THROWS_AS(select_melody(doc, MelodyPolicy{2}), Error);
}

TEST_CASE("harm timeline forward fill and key change") {
    std::string text =
        "**harm\t**kern\n"
        "*C:\t*C:\n"
        "*M4/4\t*M4/4\n"
        "I\t1c\n"
        "=1\t=1\n"
        "V\t1d\n"
        "=2\t=2\n"
        "*G:\t*G:\n"
        "I\t1g\n"
        "=3\t=3\n"
        "*-\t*-\n";
    auto doc = parse_kern(text, "keychange");
    auto tl = harm_timeline(doc);
    REQUIRE(tl.size() == 3);
    CHECK(tl[0].onset_q == Rational(0));
    CHECK(tl[0].token == "I");
    CHECK(tl[0].key.tonic_pc == 0);
    CHECK(tl[1].onset_q == Rational(4));
    CHECK(tl[2].onset_q == Rational(8));
    CHECK(tl[2].key.tonic_pc == 7); // *G: governs from onset 8
    CHECK(tl[2].key.mode == Mode::major);
}

TEST_CASE("empty harm spine yields a single governing segment") {
    std::string text =
        "**harm\t**kern\n"
        "*C:\t*C:\n"
        "*M4/4\t*M4/4\n"
        "I\t2c\n"
        ".\t2d\n"
        "=1\t=1\n"
        ".\t1e\n"
        "=2\t=2\n"
        "*-\t*-\n";
    auto tl = harm_timeline(parse_kern(text, "fill"));
    REQUIRE(tl.size() == 1);
    CHECK(tl[0].onset_q == Rational(0));
}

TEST_CASE("parser error cases") {
    CHECK_THROWS_AS(parse_kern("**kern\n*^\t*\n*-\t*-\n", "split"), Error);
    try {
        parse_kern("**kern\n*M4/4\n*C:\n4c\n*^\n*-\n", "split2");
        FAIL("expected UnsupportedSpinePath");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unsupported_spine_path);
    }

    try {
        parse_kern("**kern\n*C:\n4c\n=1\n*-\n", "nometer");
        FAIL("expected MissingInterpretation");
    } catch (const Error& e) {
        CHECK(e.code() == errc::missing_interpretation);
    }

    try {
        parse_kern("**kern\n*M4/4\n4c\n=1\n*-\n", "nokey");
        FAIL("expected MissingInterpretation");
    } catch (const Error& e) {
        CHECK(e.code() == errc::missing_interpretation);
    }

    auto doc = parse_kern("**harm\t**harm\t**kern\n*C:\t*\t*C:\n*M4/4\t*\t*M4/4\n"
                          "I\tI\t4c\n=1\t=1\t=1\n*-\t*-\t*-\n",
                          "twoharm");
    CHECK_THROWS_AS(harm_timeline(doc), Error);

    auto noharm = parse_kern("**mxhm\n*C:\n*M4/4\n.\n*-\n", "nokern");
    CHECK_THROWS_AS(select_melody(noharm), Error);
}

TEST_CASE("duration conservation warnings flag overfull bars") {
    std::string text =
        "**kern\n"
        "*M4/4\n"
        "*C:\n"
        "2c\n"
        "2d\n"
        "2e\n" // bar 0 sums to 6 quarters
        "=1\n"
        "1f\n"
        "=2\n"
        "*-\n";
    auto doc = parse_kern(text, "overfull");
    REQUIRE_FALSE(doc.warnings.empty());
    CHECK(doc.warnings[0].find("bar 0") != std::string::npos);
}

TEST_CASE("piano-style file with analysis spines and a hidden opening barline") {
    std::string text =
        "!!!COM: nobody\n"
        "**function\t**harm\t**kern\t**kern\n"
        "*\t*\t*staff2\t*staff1\n"
        "*\t*\t*clefF4\t*clefG2\n"
        "*\t*\t*k[f#]\t*k[f#]\n"
        "*\t*\t*G:\t*G:\n"
        "*\t*\t*M2/4\t*M2/4\n"
        "*\t*\t*MM72\t*MM72\n"
        "*>A\t*>A\t*>A\t*>A\n"
        "=1-\t=1-\t=1-\t=1-\n"
        "D\tV\t8r\t8dd\n"
        ".\t.\t8GG 8B 8d\t8b\n"
        "=2\t=2\t=2\t=2\n"
        "T\tI\t4G 4B\t4.gg\n"
        ".\t.\t4G\t.\n"
        ".\t.\t.\t8aa\n"
        "==\t==\t==\t==\n"
        "*-\t*-\t*-\t*-\n";
    auto doc = parse_kern(text, "piano");
    CHECK(doc.spine_count() == 4);
    CHECK(serialize(doc) == text);
    REQUIRE(doc.meter_map.size() == 1); // *MM72 is tempo, not meter
    CHECK(doc.meter_map[0].second.numerator == 2);

    auto melody = select_melody(doc); // right-most kern
    REQUIRE(melody.size() == 4);
    CHECK(melody[0].midi_pitch == 74);
    CHECK(melody[1].midi_pitch == 71);
    CHECK(melody[2].midi_pitch == 79); // gg
    CHECK(melody[3].midi_pitch == 81); // aa
    // opening bar after the hidden barline is a real pickup: 1q in 2/4
    CHECK(melody[0].onset_in_bar_q == Rational(1));
    CHECK(melody[2].onset_in_bar_q == Rational(0));

    auto left_hand = select_melody(doc, MelodyPolicy{0});
    REQUIRE(left_hand.size() == 4); // rest + chord + chord + 4G
    CHECK(left_hand[0].is_rest);
    CHECK(left_hand[1].midi_pitch == 62); // top of GG B d
    CHECK(doc.warnings.empty());

    auto tl = harm_timeline(doc);
    REQUIRE(tl.size() == 2);
    CHECK(tl[0].token == "V");
    CHECK(tl[1].onset_q == Rational(1));
    CHECK(tl[1].key.tonic_pc == 7);
}

TEST_CASE("meter map records mid-piece changes") {
    std::string text =
        "**kern\n"
        "*M4/4\n"
        "*C:\n"
        "1c\n"
        "=1\n"
        "*M3/4\n"
        "2.d\n"
        "=2\n"
        "*-\n";
    auto doc = parse_kern(text, "meterchange");
    REQUIRE(doc.meter_map.size() == 2);
    CHECK(doc.meter_map[1].first == Rational(4));
    CHECK(doc.meter_map[1].second.numerator == 3);
    CHECK(doc.warnings.empty());
}
