"""Canonical vocabulary of the World Happiness panel.

Twelve predictors plus the Life Ladder target, in a fixed canonical
order used for matrices, tables and serialized files.
"""

LOG_GDP = "Log GDP per Capita"
GINI = "Gini of Household Income"
GENEROSITY = "Generosity"
POSITIVE_AFFECT = "Positive Affect"
NEGATIVE_AFFECT = "Negative Affect"
CORRUPTION = "Perceptions of Corruption"
CONFIDENCE = "Confidence in National Government"
HEALTHY_LIFE_EXPECTANCY = "Healthy Life Expectancy"
DEMOCRATIC_QUALITY = "Democratic Quality"
DELIVERY_QUALITY = "Delivery Quality"
FREEDOM = "Freedom to Make Life Choices"
SOCIAL_SUPPORT = "Social Support"
LIFE_LADDER = "Life Ladder"

PREDICTORS = (
    LOG_GDP,
    GINI,
    GENEROSITY,
    POSITIVE_AFFECT,
    NEGATIVE_AFFECT,
    CORRUPTION,
    CONFIDENCE,
    HEALTHY_LIFE_EXPECTANCY,
    DEMOCRATIC_QUALITY,
    DELIVERY_QUALITY,
    FREEDOM,
    SOCIAL_SUPPORT,
)

ALL_VARIABLES = PREDICTORS + (LIFE_LADDER,)

#: Panel window used throughout: train on 2016-2018, hold out 2019.
WINDOW_YEARS = (2016, 2017, 2018, 2019)

#: Years the raw survey may legitimately contain.
SURVEY_YEARS = tuple(range(2005, 2020))
