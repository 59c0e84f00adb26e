#!/usr/bin/env python3
"""Recode the Statlog German credit table into integer feature levels.

Input: germancredit.csv as shipped in the scorecardpy package (text levels).
Output: german_credit.csv with 20 integer/numeric features and a
credit_risk column holding "good"/"bad".
"""
import csv
import sys

LEVELS = {
    "status_of_existing_checking_account": {
        "no checking account": 1,
        "... < 0 DM": 2,
        "0 <= ... < 200 DM": 3,
        "... >= 200 DM / salary assignments for at least 1 year": 4,
    },
    "credit_history": {
        "delay in paying off in the past": 0,
        "critical account/ other credits existing (not at this bank)": 1,
        "no credits taken/ all credits paid back duly": 2,
        "existing credits paid back duly till now": 3,
        "all credits at this bank paid back duly": 4,
    },
    "purpose": {
        "others": 0, "car (new)": 1, "car (used)": 2, "furniture/equipment": 3,
        "radio/television": 4, "domestic appliances": 5, "repairs": 6,
        "education": 7, "vacation": 8, "retraining": 9, "business": 10,
    },
    "savings_account_and_bonds": {
        "unknown/ no savings account": 1,
        "... < 100 DM": 2,
        "100 <= ... < 500 DM": 3,
        "500 <= ... < 1000 DM": 4,
        "... >= 1000 DM": 5,
    },
    "present_employment_since": {
        "unemployed": 1, "... < 1 year": 2, "1 <= ... < 4 years": 3,
        "4 <= ... < 7 years": 4, "... >= 7 years": 5,
    },
    "personal_status_and_sex": {
        "male : divorced/separated": 1,
        "female : divorced/separated/married": 2,
        "male : single": 3,
        "male : married/widowed": 4,
    },
    "other_debtors_or_guarantors": {"none": 1, "co-applicant": 2, "guarantor": 3},
    "property": {
        "unknown / no property": 1,
        "car or other, not in attribute Savings account/bonds": 2,
        "building society savings agreement/ life insurance": 3,
        "real estate": 4,
    },
    "other_installment_plans": {"bank": 1, "stores": 2, "none": 3},
    "housing": {"for free": 1, "rent": 2, "own": 3},
    "job": {
        "unemployed/ unskilled - non-resident": 1,
        "unskilled - resident": 2,
        "skilled employee / official": 3,
        "management/ self-employed/ highly qualified employee/ officer": 4,
    },
    "telephone": {"none": 1, "yes, registered under the customers name": 2},
    "foreign_worker": {"yes": 1, "no": 2},
}

COLUMNS = [
    ("status", "status_of_existing_checking_account"),
    ("duration", "duration_in_month"),
    ("credit_history", "credit_history"),
    ("purpose", "purpose"),
    ("amount", "credit_amount"),
    ("savings", "savings_account_and_bonds"),
    ("employment_duration", "present_employment_since"),
    ("installment_rate", "installment_rate_in_percentage_of_disposable_income"),
    ("personal_status_sex", "personal_status_and_sex"),
    ("other_debtors", "other_debtors_or_guarantors"),
    ("present_residence", "present_residence_since"),
    ("property", "property"),
    ("age", "age_in_years"),
    ("other_installment_plans", "other_installment_plans"),
    ("housing", "housing"),
    ("number_credits", "number_of_existing_credits_at_this_bank"),
    ("job", "job"),
    ("people_liable", "number_of_people_being_liable_to_provide_maintenance_for"),
    ("telephone", "telephone"),
    ("foreign_worker", "foreign_worker"),
]


def main(src, dst):
    with open(src, newline="") as fin, open(dst, "w", newline="") as fout:
        reader = csv.DictReader(fin)
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow([name for name, _ in COLUMNS] + ["credit_risk"])
        for row in reader:
            out = []
            for _, source in COLUMNS:
                value = row[source]
                out.append(LEVELS[source][value] if source in LEVELS else int(value))
            writer.writerow(out + [row["creditability"]])


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
