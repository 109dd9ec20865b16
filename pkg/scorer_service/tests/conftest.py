"""Shared fixtures for the scorer service tests."""

import pytest

# (text, unrelated text) pairs: the left side should always outrank the
# right side as a candidate for the left side's reference
RANKING_FIXTURES = [
    ("The movie won three awards last night.", "My cat sleeps on the windowsill."),
    ("She plays bass in a jazz quartet.", "The bridge was closed for repairs."),
    ("This game supports eight players online.", "He planted tomatoes in the garden."),
    ("The director filmed the chase in one take.", "Rain is expected on Thursday."),
    ("Their new single came out on Friday.", "The library opens at nine."),
    ("He coaches the youth soccer team.", "The recipe calls for two eggs."),
    ("The finale drew record ratings.", "A spider built a web in the shed."),
    ("The studio delayed the sequel again.", "Her passport expires next month."),
    ("The drummer joined the band in 2015.", "The kettle whistled in the kitchen."),
    ("Critics praised the voice acting.", "The train was four minutes late."),
    ("The show was renewed for two seasons.", "He painted the fence green."),
    ("Her debut novel became a bestseller.", "The parking lot was nearly empty."),
    ("The quarterback threw for 300 yards.", "Leaves covered the front steps."),
    ("The orchestra performed the full score live.", "The printer is out of toner."),
    ("Players can customize every vehicle.", "She folded the laundry quickly."),
    ("The documentary covers the 1996 season.", "The soup needs more salt."),
    ("The remake keeps the original ending.", "A fox crossed the empty road."),
    ("The tour sold out in ten minutes.", "The password must be changed."),
    ("The pilot episode aired without ads.", "His umbrella turned inside out."),
    ("The soundtrack features twelve new tracks.", "The elevator stopped on five."),
]


@pytest.fixture(scope="session")
def ranking_pairs():
    return list(RANKING_FIXTURES)
