#include "pm2s/score.hpp"

#include <algorithm>
#include <tuple>

namespace pm2s {

namespace {

bool note_less(const ScoreNote& a, const ScoreNote& b) {
    return std::tie(a.onset, a.pitch, a.duration) < std::tie(b.onset, b.pitch, b.duration);
}

} // namespace

bool same_attributes(const ScoreNote& a, const ScoreNote& b) {
    return a.pitch == b.pitch && a.onset == b.onset && a.duration == b.duration &&
           a.staff == b.staff && a.voice == b.voice && a.stem == b.stem &&
           a.accidental == b.accidental && a.grace == b.grace && a.trill == b.trill &&
           a.staccato == b.staccato;
}

std::size_t Score::note_count() const {
    std::size_t n = 0;
    for (const Measure& m : measures)
        n += m.notes.size();
    return n;
}

std::vector<long> Score::measure_starts() const {
    std::vector<long> starts;
    starts.reserve(measures.size());
    long at = 0;
    for (const Measure& m : measures) {
        starts.push_back(at);
        at += m.length;
    }
    return starts;
}

void canonicalize(Score& score) {
    for (Measure& m : score.measures)
        std::stable_sort(m.notes.begin(), m.notes.end(), note_less);
}

bool is_canonical(const Score& score) {
    for (const Measure& m : score.measures)
        if (!std::is_sorted(m.notes.begin(), m.notes.end(), note_less))
            return false;
    return true;
}

std::vector<PlacedNote> flatten(const Score& score) {
    std::vector<PlacedNote> out;
    out.reserve(score.note_count());
    long start = 0;
    for (std::size_t i = 0; i < score.measures.size(); ++i) {
        const Measure& m = score.measures[i];
        std::vector<const ScoreNote*> order;
        order.reserve(m.notes.size());
        for (const ScoreNote& n : m.notes)
            order.push_back(&n);
        std::stable_sort(order.begin(), order.end(),
                         [](const ScoreNote* a, const ScoreNote* b) { return note_less(*a, *b); });
        for (const ScoreNote* n : order)
            out.push_back({i, start + n->onset, *n});
        start += m.length;
    }
    return out;
}

} // namespace pm2s
