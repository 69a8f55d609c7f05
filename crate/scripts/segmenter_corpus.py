"""Source documents for the segmenter golden corpus."""

DOCS = [
"""The Eiffel Tower was completed in 1889 for the World's Fair. It stands about 330 meters tall. Gustave Eiffel's company designed and built it. At first, many Parisian artists criticized the design. Today it is one of the most visited monuments in the world.""",
"""There are several ways to reduce household energy use:
- Switch to LED lighting
- Insulate the attic and walls
- Use a programmable thermostat
- Unplug devices that are not in use
Small changes add up over a year. According to the U.S. Department of Energy, heating and cooling account for roughly half of home energy use.""",
"""Dr. Maria Lopez published the study in 2021. She worked with Prof. James Chen at Stanford. Their team surveyed 4,500 patients. The results showed a 12.5% drop in readmissions. Critics argued that the sample was not representative. Dr. Lopez responded in a follow-up paper.""",
"""Photosynthesis converts light energy into chemical energy. Plants use carbon dioxide and water as inputs. Oxygen is released as a by-product. The process takes place mainly in the chloroplasts. Without it, most life on Earth could not exist.""",
"""**Key milestones in space exploration**
1. Sputnik 1 was launched by the Soviet Union in 1957.
2. Yuri Gagarin became the first human in space in 1961.
3. Apollo 11 landed on the Moon on July 20, 1969.
4. The International Space Station began operations in 2000.
Each of these events reshaped public interest in science.""",
"""Why do cats purr? Researchers are still debating the answer. Purring may signal contentment. However, cats also purr when injured or stressed! Some scientists believe the vibrations promote healing.""",
"""Mt. Everest is the highest mountain above sea level. Its summit reaches 8,849 m. Sir Edmund Hillary and Tenzing Norgay first reached the top in 1953. Since then, more than 6,000 people have climbed it. Overcrowding has become a serious problem in recent years.""",
"""The company reported revenue of $4.2 billion in Q3. That was up 8% from the prior year. Net income, however, fell to $310 million. The CEO, Ms. Patel, said the decline was temporary. Analysts at Goldman Sachs were less optimistic.""",
"""Here are some tips for better sleep:
- Keep a consistent schedule, even on weekends.
- Avoid caffeine after 2 p.m.
- Keep your bedroom cool and dark.
- Limit screen time before bed.
If problems persist, consult a doctor.""",
"""The Treaty of Versailles was signed on June 28, 1919. It formally ended World War I between Germany and the Allied Powers. Germany was required to accept responsibility for the war. The treaty also imposed heavy reparations. Many historians link its terms to the rise of extremism in the 1930s.""",
"""Python is a popular programming language. It was created by Guido van Rossum. The first version appeared in 1991. Python emphasizes readability, e.g. through significant indentation. It is widely used in data science, web development, and automation.""",
"""Climate change affects agriculture in several ways. Rising temperatures can reduce crop yields. Changes in rainfall patterns create droughts in some regions and floods in others. Farmers are adapting by planting drought-resistant varieties. Governments are also investing in irrigation.""",
"""John F. Kennedy was the 35th president of the United States. He was assassinated in Dallas in November 1963. Lyndon B. Johnson was sworn in aboard Air Force One. The Warren Commission later investigated the killing. Its conclusions remain controversial.""",
"""The Amazon rainforest spans nine countries. Brazil contains about 60% of it. The forest produces a significant share of the world's oxygen. Deforestation rates rose sharply in 2019. Conservation groups such as the WWF have called for stronger protections.""",
"""Vaccines train the immune system to recognize pathogens. They usually contain weakened or inactivated forms of a virus. Some newer vaccines use mRNA instead. The first mRNA vaccines were approved in 2020. They proved highly effective against severe COVID-19.""",
"""Some notable features of the new phone include:
- A 6.7-inch OLED display
- A 50 MP main camera
- 5G connectivity
- All-day battery life
The phone costs $999 in the U.S. It ships in three colors.""",
"""The Great Wall of China is not a single wall. It is a series of fortifications built over centuries. The most famous sections date to the Ming Dynasty. Contrary to popular belief, it is not visible from the Moon with the naked eye. Parts of it are now crumbling.""",
"""Shakespeare wrote about 37 plays. His works include tragedies, comedies, and histories. "Hamlet" is often considered his masterpiece. He also wrote 154 sonnets. Scholars still debate details of his biography.""",
"""In 2010, John Smith led TurboCorp's operations team. He later moved to the finance team. By 2015, he had become CFO. Under his leadership, the company's debt fell by 40%. He retired in 2020.""",
"""What is inflation? Inflation is the rate at which prices rise over time. Central banks usually target an annual rate of about 2%. When inflation is too high, purchasing power declines. When it is too low, the economy may stagnate.""",
"""The Mediterranean diet emphasizes vegetables, fruits, and olive oil. It includes moderate amounts of fish and poultry. Red meat is eaten only occasionally. Studies link the diet to lower rates of heart disease [1]. It was recognized by UNESCO in 2010 [2].""",
"""### Summary
The bridge opened in 1937. It was the longest suspension bridge in the world at the time. Its color is officially called "International Orange." About 112,000 vehicles cross it each day.""",
"""Electric vehicles have grown rapidly in popularity. In 2023, they made up about 18% of new car sales worldwide. Norway leads the world in adoption. China is the largest market by volume. Charging infrastructure remains a challenge in rural areas.""",
"""The Nile is often cited as the longest river in the world. It flows north through eleven countries. Its two main tributaries are the White Nile and the Blue Nile. They meet in Khartoum, Sudan. The Aswan High Dam, completed in 1970, controls its flooding.""",
"""Consider these factors when choosing a laptop:
- Processor speed and core count
- Amount of RAM (at least 16 GB for heavy use)
- Battery life
- Weight and portability
- Price
Ultimately, the best choice depends on how you plan to use it.""",
"""Marie Curie was born in Warsaw in 1867. She moved to Paris to study at the Sorbonne. She won the Nobel Prize in Physics in 1903. In 1911, she won a second Nobel Prize, this time in Chemistry. She remains the only person to win Nobel Prizes in two different sciences.""",
"""The stock fell 3.4% on Monday. Trading volume was unusually high. Investors reacted to news that the FDA had delayed approval of the company's drug. The company said it would respond to the agency's questions. Shares recovered slightly on Tuesday.""",
"""George R. R. Martin wrote the novels that inspired the television series. The first book was published in 1996. The sixth book has not yet been released. Fans have waited more than a decade for it. Martin says he is still writing.""",
"""The experiment failed... at least at first. The team repeated it with a cleaner sample. This time the signal was clear. They published the results in Nature. Other labs later confirmed the finding.""",
"""She asked, "Is anyone there?" Nobody answered. The house had been empty for years. Its last owner, Mr. Harold Blake, died in 2004. The property was sold at auction in 2012.""",
"""Honeybees communicate through a "waggle dance." The dance tells other bees where food is located. Its angle indicates direction relative to the sun. Its duration indicates distance. Karl von Frisch won a Nobel Prize for decoding it in 1973.""",
"""The following countries use the euro:
- Germany
- France
- Italy
- Spain
Denmark is an EU member but keeps its own currency. Sweden also does not use the euro.""",
"""Antibiotics do not work against viruses. They target bacteria only. Overuse has led to antibiotic resistance. The WHO calls this one of the biggest threats to global health. Doctors are urged to prescribe them carefully.""",
"""The Roman Empire reached its greatest extent under Trajan. That was around 117 AD. The empire later split into eastern and western halves. The Western Roman Empire fell in 476. The Eastern Roman Empire lasted until 1453.""",
"""Coffee originated in Ethiopia. It spread to Yemen by the 15th century. From there, it reached Europe in the 1600s. Today, Brazil is the largest producer. Finland has the highest consumption per person.""",
"""**Pros and cons of remote work**
Remote work saves commuting time. It can also improve focus for some employees. On the other hand, collaboration can suffer. Some workers report feeling isolated. Many companies now use a hybrid model.""",
"""The Wright brothers made the first powered flight in 1903. The flight lasted 12 seconds. It took place near Kitty Hawk, North Carolina. Orville piloted the aircraft. Wilbur ran alongside to steady the wing.""",
"""Octopuses have three hearts. Two pump blood to the gills. The third pumps it to the rest of the body. Their blood is blue because it contains hemocyanin. They are also remarkably intelligent.""",
"""The Hubble Space Telescope was launched in 1990. Its mirror had a flaw that blurred images. Astronauts fixed it during a servicing mission in 1993. Since then, Hubble has made many important discoveries. It helped measure the expansion rate of the universe.""",
"""Several factors contributed to the 2008 financial crisis:
1. Risky subprime mortgage lending.
2. Complex financial products such as CDOs.
3. Excessive leverage at major banks.
Lehman Brothers filed for bankruptcy in Sept. 2008. Governments responded with large bailouts.""",
"""Mount Vesuvius erupted in 79 AD. The eruption buried the cities of Pompeii and Herculaneum. Pliny the Younger described it in letters. Excavations began in the 18th century. The site is now a UNESCO World Heritage Site.""",
"""Chess originated in India around the 6th century. It spread to Persia and then to Europe. The modern rules were settled by the late 15th century. In 1997, IBM's Deep Blue defeated Garry Kasparov. Computers have dominated human players ever since.""",
]
