package petclinic.visit;

import java.time.LocalDate;

import petclinic.BaseEntity;

public class Visit extends BaseEntity {

    private LocalDate date;
    private String description;

    public LocalDate getDate() {
        return date;
    }

    public void setDate(LocalDate date) {
        this.date = date;
    }

    public String getDescription() {
        return description;
    }
}
