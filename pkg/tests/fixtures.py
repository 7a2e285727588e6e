"""Reference sentences and logical forms shared by the tests."""

BOY_WANTED = (
    "The boy wanted to go .",
    "* boy ( x _ 1 ) ; want . agent ( x _ 2 , x _ 1 ) AND want . xcomp ( x _ 2 , x _ 4 ) "
    "AND go . agent ( x _ 4 , x _ 1 )",
)
AVA_LENDED = (
    "Ava was lended a cookie in a bottle .",
    "lend . recipient ( x _ 2 , Ava ) AND lend . theme ( x _ 2 , x _ 4 ) AND cookie ( x _ 4 ) "
    "AND cookie . nmod . in ( x _ 4 , x _ 7 ) AND bottle ( x _ 7 )",
)
CP_CHAIN = (
    "Ava said that Ben declared that Claire slept .",
    "say . agent ( x _ 1 , Ava ) AND say . ccomp ( x _ 1 , x _ 4 ) AND declare . agent ( x _ 4 , Ben ) "
    "AND declare . ccomp ( x _ 4 , x _ 7 ) AND sleep . agent ( x _ 7 , Claire )",
)
TOUCH = (
    "touch",
    "LAMBDA a . LAMBDA b . LAMBDA e . touch . agent ( e , b ) AND touch . theme ( e , a )",
)
BALL_IN_BOWL = (
    "Ava saw a ball in a bowl on the table .",
    "* table ( x _ 9 ) ; see . agent ( x _ 1 , Ava ) AND see . theme ( x _ 1 , x _ 3 ) AND ball ( x _ 3 ) "
    "AND ball . nmod . in ( x _ 3 , x _ 6 ) AND bowl ( x _ 6 ) AND bowl . nmod . on ( x _ 6 , x _ 9 )",
)
BABY_GOLD = (
    "The baby on a tray in the house screamed .",
    "* baby ( x _ 1 ) ; * house ( x _ 7 ) ; baby . nmod . on ( x _ 1 , x _ 4 ) AND tray ( x _ 4 ) "
    "AND tray . nmod . in ( x _ 4 , x _ 7 ) AND scream . agent ( x _ 8 , x _ 1 )",
)
# two wrong predictions for the same sentence
BABY_SEQ2SEQ = (
    "* baby ( x _ 1 ) ; * house ( x _ 7 ) ; scream . agent ( x _ 2 , x _ 1 ) AND scream . theme ( x _ 2 , x _ 4 ) "
    "AND tray ( x _ 4 ) AND tray . nmod . in ( x _ 4 , x _ 7 )"
)
BABY_AM = (
    "* baby ( x _ 1 ) ; * house ( x _ 7 ) ; baby . nmod . on ( x _ 1 , x _ 4 ) AND tray ( x _ 4 ) "
    "AND tray . nmod . in ( x _ 4 , x _ 8 ) AND scream . agent ( x _ 8 , x _ 7 )"
)

SENTENCES = [BOY_WANTED, AVA_LENDED, CP_CHAIN, BALL_IN_BOWL, BABY_GOLD]
