#include "pm2s/pitch_spelling.hpp"

#include "pm2s/errors.hpp"

#include <cmath>
#include <cstdlib>

namespace pm2s {

namespace {

constexpr int kStepSemitones[7] = {0, 2, 4, 5, 7, 9, 11}; // C D E F G A B
constexpr int kStepLof[7] = {0, 2, 4, -1, 1, 3, 5};       // line-of-fifths base

int floor_div(int a, int b) {
    int q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int mod12(int v) { return ((v % 12) + 12) % 12; }

} // namespace

int step_semitones(int step) { return kStepSemitones[step]; }

int natural_step_of_pitch_class(int pc) {
    for (int s = 0; s < 7; ++s)
        if (kStepSemitones[s] == pc)
            return s;
    return -1;
}

char step_letter(int step) { return "CDEFGAB"[step]; }

int letter_step(char letter) {
    const char* names = "CDEFGAB";
    for (int s = 0; s < 7; ++s)
        if (names[s] == letter)
            return s;
    return -1;
}

int accidental_alter(Accidental acc) {
    switch (acc) {
    case Accidental::DoubleFlat: return -2;
    case Accidental::Flat: return -1;
    case Accidental::Natural: return 0;
    case Accidental::Sharp: return 1;
    case Accidental::DoubleSharp: return 2;
    case Accidental::None: return 0;
    }
    return 0;
}

Accidental alter_accidental(int alter) {
    switch (alter) {
    case -2: return Accidental::DoubleFlat;
    case -1: return Accidental::Flat;
    case 0: return Accidental::Natural;
    case 1: return Accidental::Sharp;
    case 2: return Accidental::DoubleSharp;
    default: throw InputError("alter out of range [-2,2]: " + std::to_string(alter));
    }
}

int spelling_to_pitch(const Spelling& s) {
    return (s.octave + 1) * 12 + kStepSemitones[s.step] + s.alter;
}

namespace {

Spelling none_rule(int pitch) {
    Spelling sp;
    int pc = mod12(pitch);
    int natural = natural_step_of_pitch_class(pc);
    if (natural >= 0) {
        sp.step = natural;
        sp.alter = 0;
    } else {
        sp.step = natural_step_of_pitch_class(pc - 1);
        sp.alter = 1;
    }
    sp.octave = floor_div(pitch - sp.alter, 12) - 1;
    return sp;
}

} // namespace

Spelling derive_spelling(int pitch, Accidental acc, bool* fallback) {
    if (fallback)
        *fallback = false;
    if (acc != Accidental::None) {
        int alter = accidental_alter(acc);
        int natural = natural_step_of_pitch_class(mod12(pitch - alter));
        if (natural >= 0) {
            Spelling sp;
            sp.step = natural;
            sp.alter = alter;
            sp.octave = floor_div(pitch - alter, 12) - 1;
            return sp;
        }
        if (fallback)
            *fallback = true;
    }
    return none_rule(pitch);
}

int line_of_fifths(int step, int alter) { return kStepLof[step] + 7 * alter; }

Spelling spelling_from_line_of_fifths(int lof) {
    Spelling sp;
    sp.alter = floor_div(lof + 1, 7);
    int base = lof - 7 * sp.alter;
    for (int s = 0; s < 7; ++s)
        if (kStepLof[s] == base)
            sp.step = s;
    return sp;
}

int fifth_shift(int semitones) {
    int r = mod12(7 * semitones);
    if (r == 6)
        return semitones >= 0 ? 6 : -6;
    return r <= 6 ? r : r - 12;
}

} // namespace pm2s
