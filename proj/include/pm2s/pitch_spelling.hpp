#pragma once

namespace pm2s {

// Order matches the accidental token vocabulary (6 values).
enum class Accidental { DoubleFlat = 0, Flat, Natural, Sharp, DoubleSharp, None };

enum class Stem { Up = 0, Down, None };

// A concrete letter spelling. step 0..6 = C D E F G A B.
struct Spelling {
    int step = 0;
    int alter = 0;  // [-2, 2]
    int octave = 4; // scientific pitch notation, C4 = MIDI 60

    bool operator==(const Spelling&) const = default;
};

// Semitone offset of each natural letter within the octave.
int step_semitones(int step);

// Letter for a natural pitch class, or -1 if the class needs an accidental.
int natural_step_of_pitch_class(int pc);

char step_letter(int step);
int letter_step(char letter); // -1 if not A-G

int accidental_alter(Accidental acc); // None is treated as 0
Accidental alter_accidental(int alter);

int spelling_to_pitch(const Spelling& s);

// Spelling for (pitch, accidental). With an explicit accidental the natural
// letter is (pitch - alter); if that is not a letter the accidental is
// dropped and the None rule applies (fallback flagged). With None, a natural
// letter spelling of the pitch class is preferred, else the sharp spelling.
Spelling derive_spelling(int pitch, Accidental acc, bool* fallback = nullptr);

// Line-of-fifths index of a (step, alter) spelling: F=-1 C=0 G=1 D=2 A=3
// E=4 B=5, plus 7 per sharp. Inverse ignores octave.
int line_of_fifths(int step, int alter);
Spelling spelling_from_line_of_fifths(int lof);

// Line-of-fifths displacement of a transposition by k semitones: the
// representative of 7k (mod 12) with minimal magnitude, ties broken toward
// the sign of k so that fifth_shift(-k) == -fifth_shift(k).
int fifth_shift(int semitones);

} // namespace pm2s
